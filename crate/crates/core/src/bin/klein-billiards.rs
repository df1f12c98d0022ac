fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mut stdout = std::io::stdout().lock();
    std::process::exit(klein_billiards::cli::run(&args, &mut stdout));
}
