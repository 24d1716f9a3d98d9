#include <iostream>

#include "letomo/cli.hpp"

int main(int argc, char** argv)
{
    return letomo::run_command(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
