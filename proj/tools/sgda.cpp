#include "sgda/cli.hpp"

int main(int argc, char** argv) { return sgda::cli_main(argc, argv); }
