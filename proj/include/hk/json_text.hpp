#pragma once

// JSON documents with insertion-ordered keys, serialized with 17 significant
// digits so equal runs produce byte-identical files.

#include <string>

#include "json.hpp"

namespace hk {

using Json = nlohmann::ordered_json;

// "%.17g"; non-finite values become "null".
std::string format_double(double v);

// Pretty-printed with two-space indentation when indent > 0, otherwise one line.
std::string to_json_text(const Json& value, int indent = 2);

}  // namespace hk
