#include "jrm/commands.hpp"

int main(int argc, char** argv) { return jrm::run_cli(argc, argv); }
