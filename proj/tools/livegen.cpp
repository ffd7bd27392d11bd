#include <livegen/cli.hpp>

int main(int argc, char** argv)
{
    return livegen::cli::run_cli(argc, argv);
}
