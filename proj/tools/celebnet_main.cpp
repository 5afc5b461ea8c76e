#include "celebnet/config.hpp"

int main(int argc, char** argv) { return celebnet::cli_main(argc, argv); }
