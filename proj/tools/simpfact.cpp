#include "simpfact/cli.hpp"

int main(int argc, char** argv) { return simpfact::cli::run(argc, argv); }
