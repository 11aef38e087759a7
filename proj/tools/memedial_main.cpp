#include "memedial/cli.hpp"

int main(int argc, char** argv) { return memedial::cli::run(argc, argv); }
