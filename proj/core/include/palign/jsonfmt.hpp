#pragma once

#include <string>

namespace palign {

// Shortest-of-9-significant-digits float formatting ("%.9g"). All JSON and CSV
// emitted by this library goes through here so outputs are byte-stable.
std::string g9(double value);

// JSON string literal with the usual escapes.
std::string jsonQuote(const std::string& s);

}  // namespace palign
