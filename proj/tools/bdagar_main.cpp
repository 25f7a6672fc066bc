#include "bdagar/io.hpp"

int main(int argc, char** argv) { return bdagar::cli_main(argc, argv); }
