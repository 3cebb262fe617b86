#pragma once

namespace gpner {

// Entry point behind the gpner binary. Returns the process exit code:
// 0 success, 2 usage or validation problems, 3 runtime failures.
int cli_main(int argc, char** argv);

}  // namespace gpner
