#include "rdpg/cli_io.hpp"

int main(int argc, char** argv) { return rdpg::cli_main(argc, argv); }
