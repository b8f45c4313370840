#pragma once

#include "nesscorr/model.hpp"

#include <iosfwd>
#include <string>
#include <string_view>

namespace nesscorr::cli {

enum ExitCode : int { exit_ok = 0, exit_runtime = 1, exit_invalid_input = 2 };

// "N=64,v=1,alpha=1.5,sigma=1000,gin=1,gout=1"; omitted keys keep the
// values already in `base`.
ChainParameters parse_chain(std::string_view text, ChainParameters base = {});

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nesscorr::cli
