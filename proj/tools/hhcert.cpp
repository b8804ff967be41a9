#include "hhcert/cli.hpp"

int main(int argc, char** argv) { return hhcert::cli::main(argc, argv); }
