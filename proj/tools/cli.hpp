#ifndef HOM_TOOLS_CLI_HPP
#define HOM_TOOLS_CLI_HPP

#include <iosfwd>

namespace hom::cli
{
// Runs one homtool invocation. Exit codes: 0 success, 1 IO/parse/usage,
// 2 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace hom::cli

#endif // HOM_TOOLS_CLI_HPP
