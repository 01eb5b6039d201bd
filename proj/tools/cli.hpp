#pragma once

namespace argen::cli {

// Exit codes: 0 success / identities-pass, 1 usage or parse error,
// 2 budget refusal, 3 identity-check failure.
int run(int argc, const char* const* argv);

}  // namespace argen::cli
