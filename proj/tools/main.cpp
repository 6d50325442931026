#include "uavirs/cli.hpp"

int main(int argc, char** argv) { return uavirs::cli::main(argc, argv); }
