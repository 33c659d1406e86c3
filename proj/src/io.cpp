#include "symdyn/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "symdyn/error.hpp"

namespace symdyn {

using nlohmann::json;

namespace {

std::size_t line_at(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

// Line of the first occurrence of `needle`, or 1.
std::size_t line_of(const std::string& text, const std::string& needle) {
  auto pos = text.find(needle);
  return pos == std::string::npos ? 1 : line_at(text, pos);
}

std::string in_quotes(const std::string& s) { return "\"" + s + "\""; }

[[noreturn]] void fail(ErrorKind kind, const std::string& source, std::size_t line, const std::string& msg) {
  throw Error(kind, source + ":" + std::to_string(line) + ": " + msg);
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::InputError, source, line_at(text, e.byte == 0 ? 0 : e.byte - 1),
         std::string("invalid JSON: ") + e.what());
  }
}

// First 'name' quoted in a library message, used to anchor it.
std::string named_in(const std::string& msg) {
  auto a = msg.find('\'');
  if (a == std::string::npos) return {};
  auto b = msg.find('\'', a + 1);
  if (b == std::string::npos) return {};
  return msg.substr(a + 1, b - a - 1);
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InputError, path + ":1: cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::shared_ptr<const ShiftGraph> parse_shift_spec(const std::string& text, const std::string& source) {
  json j = parse_json(text, source);
  if (!j.is_object()) fail(ErrorKind::InputError, source, 1, "shift spec must be a JSON object");
  if (!j.contains("symbols") || !j["symbols"].is_array())
    fail(ErrorKind::InputError, source, line_of(text, "\"symbols\""), "\"symbols\" must be an array of strings");
  if (!j.contains("edges") || !j["edges"].is_array())
    fail(ErrorKind::InputError, source, line_of(text, "\"edges\""), "\"edges\" must be an array of pairs");

  std::vector<std::string> names;
  for (const auto& s : j["symbols"]) {
    if (!s.is_string()) fail(ErrorKind::InputError, source, line_of(text, "\"symbols\""), "symbol names must be strings");
    names.push_back(s.get<std::string>());
  }
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
      fail(ErrorKind::InputError, source, line_of(text, "\"edges\""), "each edge must be a pair of symbol names");
    edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
  }
  try {
    return std::make_shared<const ShiftGraph>(ShiftGraph::build(names, edges));
  } catch (const Error& e) {
    std::string name = named_in(e.what());
    std::size_t line = 1;
    if (e.kind() == ErrorKind::UnknownSymbol) {
      auto edges_at = text.find("\"edges\"");
      auto pos = text.find(in_quotes(name), edges_at == std::string::npos ? 0 : edges_at);
      line = pos == std::string::npos ? 1 : line_at(text, pos);
    } else if (!name.empty()) {
      line = line_of(text, in_quotes(name));
    }
    fail(e.kind(), source, line, e.what());
  }
}

std::vector<SymbolId> parse_word(const ShiftGraph& g, const std::string& text) {
  std::vector<std::string> tokens;
  if (g.single_char_names()) {
    for (char c : text)
      if (!std::isspace(static_cast<unsigned char>(c)) && c != ',') tokens.emplace_back(1, c);
  } else {
    std::string cur;
    for (char c : text) {
      if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
        if (!cur.empty()) tokens.push_back(std::move(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
  }
  std::vector<SymbolId> out;
  for (const auto& t : tokens) {
    auto id = g.find(t);
    if (!id) throw Error(ErrorKind::UnknownSymbol, "unknown symbol '" + t + "' in word \"" + text + "\"");
    out.push_back(*id);
  }
  return out;
}

std::string format_word(const ShiftGraph& g, std::span<const SymbolId> letters) {
  std::string out;
  for (std::size_t i = 0; i < letters.size(); ++i) {
    if (i && !g.single_char_names()) out += ' ';
    out += g.name(letters[i]);
  }
  return out;
}

LocallyConstantPotential parse_potential(const std::string& text, const std::string& source,
                                         std::shared_ptr<const ShiftGraph> graph) {
  json j = parse_json(text, source);
  if (!j.is_object()) fail(ErrorKind::InputError, source, 1, "potential must be a JSON object");
  auto window = [&](const char* key) {
    if (!j.contains(key)) return 0;
    const auto& v = j[key];
    if (!v.is_number_integer() || v.get<long>() < 0 || v.get<long>() > 16)
      fail(ErrorKind::InputError, source, line_of(text, in_quotes(key)), std::string(key) + " must be an integer in 0..16");
    return v.get<int>();
  };
  const int a = window("past_window");
  const int b = window("future_window");
  std::optional<double> fill;
  if (j.contains("default")) {
    if (!j["default"].is_number() || !std::isfinite(j["default"].get<double>()))
      fail(ErrorKind::InputError, source, line_of(text, "\"default\""), "\"default\" must be a finite number");
    fill = j["default"].get<double>();
  }
  std::map<std::vector<SymbolId>, double> values;
  if (j.contains("values")) {
    if (!j["values"].is_object())
      fail(ErrorKind::InputError, source, line_of(text, "\"values\""), "\"values\" must map words to numbers");
    auto values_at = text.find("\"values\"");
    for (const auto& [key, v] : j["values"].items()) {
      auto pos = text.find(in_quotes(key), values_at == std::string::npos ? 0 : values_at);
      const std::size_t line = pos == std::string::npos ? 1 : line_at(text, pos);
      if (!v.is_number() || !std::isfinite(v.get<double>()))
        fail(ErrorKind::InputError, source, line, "value for \"" + key + "\" must be a finite number");
      std::vector<SymbolId> w;
      try {
        w = parse_word(*graph, key);
      } catch (const Error& e) {
        fail(e.kind(), source, line, e.what());
      }
      if (w.size() != static_cast<std::size_t>(a + b + 1))
        fail(ErrorKind::InputError, source, line,
             "word \"" + key + "\" has " + std::to_string(w.size()) + " letters; windows have " +
                 std::to_string(a + b + 1));
      if (!is_admissible(*graph, w))
        fail(ErrorKind::InadmissibleWord, source, line, "word \"" + key + "\" is not admissible");
      values[w] = v.get<double>();
    }
  }
  try {
    auto pot = LocallyConstantPotential::from_table(graph, a, b, values, fill);
    if (j.contains("holder_ratio")) {
      const auto& r = j["holder_ratio"];
      if (!r.is_number() || !(r.get<double>() > 0.0 && r.get<double>() < 1.0))
        fail(ErrorKind::InputError, source, line_of(text, "\"holder_ratio\""), "\"holder_ratio\" must lie in (0,1)");
      HolderData h{0.0, r.get<double>()};
      for (int n = 0; n < std::max(a, b); ++n) h.constant = std::max(h.constant, variation(pot, n) / std::pow(h.ratio, n));
      pot.set_holder(h);
    }
    return pot;
  } catch (const Error& e) {
    if (std::string(e.what()).rfind(source + ":", 0) == 0) throw;
    fail(e.kind(), source, 1, e.what());
  }
}

AnchorMap parse_anchors(const std::string& text, const std::string& source, const ShiftGraph& graph) {
  json j = parse_json(text, source);
  if (!j.is_object()) fail(ErrorKind::InputError, source, 1, "anchors must map symbols to words");
  AnchorMap anchors(graph.size());
  for (const auto& [key, v] : j.items()) {
    const std::size_t line = line_of(text, in_quotes(key));
    auto id = graph.find(key);
    if (!id) fail(ErrorKind::UnknownSymbol, source, line, "unknown symbol '" + key + "'");
    if (!v.is_string()) fail(ErrorKind::InputError, source, line, "anchor for '" + key + "' must be a word string");
    try {
      anchors[*id] = parse_word(graph, v.get<std::string>());
    } catch (const Error& e) {
      fail(e.kind(), source, line, e.what());
    }
  }
  for (SymbolId s = 0; s < graph.size(); ++s)
    if (anchors[s].empty()) fail(ErrorKind::BadAnchor, source, 1, "no anchor given for '" + graph.name(s) + "'");
  return anchors;
}

}  // namespace symdyn
