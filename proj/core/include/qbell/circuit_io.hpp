#pragma once

#include <string>

#include "qbell/circuit.hpp"

namespace qbell {

struct ParseError : std::runtime_error {
  std::size_t line;
  ParseError(std::size_t l, const std::string& msg)
      : std::runtime_error("line " + std::to_string(l) + ": " + msg), line(l) {}
};

std::string serialize(const Circuit& c);
Circuit parse_circuit(const std::string& text);

// Shared helpers for other text formats.
std::string bits_to_hex(const Bits& b);
Bits hex_to_bits(const std::string& s, std::size_t n);

}  // namespace qbell
