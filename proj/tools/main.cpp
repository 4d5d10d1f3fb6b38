#include "hybridgaze/cli.hpp"

int main(int argc, char** argv)
{
  return hybridgaze::cli::run(argc, argv);
}
