#include "fpcross/cli.hpp"

int main(int argc, char** argv) { return fpcross::cli::main(argc, argv); }
