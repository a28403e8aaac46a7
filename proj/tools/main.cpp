#include "sdle/cli.hpp"

int main(int argc, char** argv) { return sdle::cli_main(argc, argv); }
