#pragma once

#include <string>

#include "json.hpp"

namespace mixc {

// Canonical serialization: key-sorted objects, no whitespace, floats printed
// with %.17g so identical content always yields identical bytes. Rejects
// non-finite numbers.
std::string canonical_dump(const nlohmann::json& j);

}  // namespace mixc
