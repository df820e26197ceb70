#include "freqfit/cli.hpp"

int main(int argc, char** argv) { return freqfit::cli::main_entry(argc, argv); }
