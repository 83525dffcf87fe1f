#include "nonclass/cli.hpp"

int main(int argc, char** argv) { return nonclass::cli::run(argc, argv); }
