#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "symdyn/potential.hpp"
#include "symdyn/shift_graph.hpp"

namespace symdyn {

// Shift spec: {"symbols": [...], "edges": [["a","b"], ...]}. Failures throw
// Error(InputError) with a "source:line: ..." message.
std::shared_ptr<const ShiftGraph> parse_shift_spec(const std::string& text, const std::string& source);

// Potential: {"past_window": a, "future_window": b, "values": {"word": v},
// "default": v0, "holder_ratio": theta}. "default" fills unlisted windows;
// "holder_ratio" is optional.
LocallyConstantPotential parse_potential(const std::string& text, const std::string& source,
                                         std::shared_ptr<const ShiftGraph> graph);

// Explicit anchors: {"a": "ab", ...}, one entry per symbol.
AnchorMap parse_anchors(const std::string& text, const std::string& source, const ShiftGraph& graph);

// Words are written letter by letter when every symbol name is one
// character, otherwise with single spaces. Parsing accepts either form plus
// commas as separators.
std::string format_word(const ShiftGraph& g, std::span<const SymbolId> letters);
std::vector<SymbolId> parse_word(const ShiftGraph& g, const std::string& text);

std::string read_file(const std::string& path);

}  // namespace symdyn
