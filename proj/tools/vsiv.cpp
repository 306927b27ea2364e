// vsiv.cpp -- thin executable wrapper around the command-line front end.

#include "vsiv/cli.hpp"

int main(int argc, char** argv) { return vsiv::cli::run(argc, argv); }
