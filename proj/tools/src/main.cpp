#include "sire/cli.hpp"

#include <iostream>

int main(int argc, char **argv) {
	return sire::cli::run(argc, argv, std::cout, std::cerr);
}
