#pragma once

namespace sgda {

/// Entry point of the sgda command-line tool.
int cli_main(int argc, char** argv);

}  // namespace sgda
