#include "gaussgame/cli.hpp"

int main(int argc, char** argv) { return gaussgame::run_command(argc, argv); }
