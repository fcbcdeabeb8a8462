#pragma once

namespace seal::cli {

// Entry point of the `seal` tool. Exit codes: 0 success (and `verify` match),
// 1 usage or runtime error, 2 `verify` no-match, 3 `verify` suspect.
int run(int argc, const char* const* argv);

}  // namespace seal::cli
