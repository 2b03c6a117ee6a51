#include "commands.hpp"

int main(int argc, char** argv) { return linklda::cli::run(argc, argv); }
