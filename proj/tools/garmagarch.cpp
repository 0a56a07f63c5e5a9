#include "garmagarch/cli.hpp"

int main(int argc, char** argv) { return garmagarch::cli::main_entry(argc, argv); }
