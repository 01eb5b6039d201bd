#include "cli.hpp"

int main(int argc, char** argv) { return argen::cli::run(argc, argv); }
