#include "cli_app.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return landrec::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
