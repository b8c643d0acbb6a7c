#include <string>
#include <vector>

#include "kerromit/cli.hpp"

int main(int argc, char **argv)
{
    return kerromit::run_command(std::vector<std::string>(argv + 1, argv + argc));
}
