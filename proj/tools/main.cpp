#include "cli.hpp"

int main(int argc, char** argv) {
    return motley::cli::run(argc, argv, std::cout, std::cerr);
}
