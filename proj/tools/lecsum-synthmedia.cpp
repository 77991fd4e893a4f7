// Decoder/muxer stand-in for synthetic lecture videos (.lsv documents).
#include "lecsum/synth_media.hpp"

int main(int argc, char** argv) { return lecsum::synth::run_tool(argc, argv); }
