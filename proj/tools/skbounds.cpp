#include "skb/cli/run.hpp"

int main(int argc, char** argv) { return skb::cli::main(argc, argv); }
