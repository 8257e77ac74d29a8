fn main() {
    std::process::exit(matrixfirst::cli::main_exit_code());
}
