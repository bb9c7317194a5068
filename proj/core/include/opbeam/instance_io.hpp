#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "opbeam/instance.hpp"

namespace opbeam {

/// Malformed file contents (syntax errors, missing or mistyped fields).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// JSON object with n, t_max, start, end, prize, cost and optional coords.
/// Doubles are written in shortest round-trip form, so parse(dump(x)) == x.
std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);

Instance read_instance(const std::filesystem::path& file);
void write_instance(const Instance& inst, const std::filesystem::path& file);

}  // namespace opbeam
