fn main() {
    std::process::exit(proxmix::app::run(std::env::args_os()));
}
