#include "logitype/cli.hpp"

int main(int argc, char** argv) { return logitype::run(argc, argv); }
