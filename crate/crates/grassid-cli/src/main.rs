fn main() {
    println!("grassid");
}
