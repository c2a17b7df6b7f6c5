#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "gridcascade/format.hpp"
#include "gridcascade/grid.hpp"

namespace gridcascade {

namespace {

struct PendingLine {
  LineId id;
  NodeId from;
  NodeId to;
  std::optional<double> reactance;
  std::optional<double> capacity;
  std::size_t line_number;
};

class RecordParser {
 public:
  RecordParser(const std::string& source, std::size_t line_number,
               std::vector<std::string> tokens)
      : source_(source), line_number_(line_number), tokens_(std::move(tokens)) {}

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(std::size_t i) const { return tokens_[i]; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source_, line_number_, what);
  }

  double number(std::size_t i, const char* field) const {
    if (i >= tokens_.size()) fail(fmt::format("missing field '{}'", field));
    return parse_number(tokens_[i], field);
  }

  double parse_number(const std::string& text, const char* field) const {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
      fail(fmt::format("malformed {} '{}'", field, text));
    }
    return value;
  }

  std::size_t index(std::size_t i, const char* field) const {
    if (i >= tokens_.size()) fail(fmt::format("missing field '{}'", field));
    const auto& text = tokens_[i];
    std::size_t value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
      fail(fmt::format("malformed {} '{}'", field, text));
    }
    return value;
  }

 private:
  const std::string& source_;
  std::size_t line_number_;
  std::vector<std::string> tokens_;
};

std::vector<std::string> tokenize(std::string_view line) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<std::string> tokens;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

}  // namespace

Grid parse_grid(const std::string& text, const std::string& source, const LoadOptions& options) {
  std::vector<Node> nodes;
  std::vector<PendingLine> pending;
  std::set<NodeId> node_ids;
  std::set<LineId> line_ids;

  std::istringstream in(text);
  std::string raw;
  std::size_t line_number = 0;
  while (std::getline(in, raw)) {
    ++line_number;
    RecordParser rec(source, line_number, tokenize(raw));
    if (rec.size() == 0) continue;
    const auto& kind = rec.token(0);
    if (kind == "node") {
      Node n;
      n.id = rec.index(1, "node id");
      n.coord = {rec.number(2, "x"), rec.number(3, "y")};
      if (rec.size() < 5) rec.fail("missing node role");
      const auto& role = rec.token(4);
      if (role == "supply" || role == "demand") {
        const double power = rec.number(5, role.c_str());
        if (power < 0.0) rec.fail(fmt::format("negative {} {}", role, power));
        n.role = role == "supply" ? NodeRole::supply(power) : NodeRole::demand(power);
        if (rec.size() > 6) rec.fail("trailing fields after node role");
      } else if (role == "neutral") {
        if (rec.size() > 5) rec.fail("trailing fields after node role");
      } else {
        rec.fail(fmt::format("unknown node role '{}'", role));
      }
      if (!node_ids.insert(n.id).second) rec.fail(fmt::format("duplicate node id {}", n.id));
      nodes.push_back(n);
    } else if (kind == "line") {
      PendingLine l{rec.index(1, "line id"), rec.index(2, "from"), rec.index(3, "to"),
                    std::nullopt, std::nullopt, line_number};
      for (std::size_t i = 4; i < rec.size(); ++i) {
        const auto& tok = rec.token(i);
        if (tok.starts_with("x=")) {
          l.reactance = rec.parse_number(tok.substr(2), "reactance");
        } else if (tok.starts_with("u=")) {
          l.capacity = rec.parse_number(tok.substr(2), "capacity");
        } else {
          rec.fail(fmt::format("unexpected line field '{}'", tok));
        }
      }
      if (!line_ids.insert(l.id).second) rec.fail(fmt::format("duplicate line id {}", l.id));
      pending.push_back(l);
    } else {
      rec.fail(fmt::format("unknown record '{}'", kind));
    }
  }

  std::vector<Point> coords(nodes.size() + 1);
  std::vector<bool> known(coords.size(), false);
  for (const auto& n : nodes) {
    if (n.id < coords.size()) {
      coords[n.id] = n.coord;
      known[n.id] = true;
    }
  }
  std::vector<Line> lines;
  lines.reserve(pending.size());
  for (const auto& p : pending) {
    Line l{p.id, p.from, p.to, 0.0, p.capacity};
    if (p.reactance) {
      l.reactance = *p.reactance;
    } else if (p.from < known.size() && p.to < known.size() && known[p.from] && known[p.to]) {
      l.reactance = distance(coords[p.from], coords[p.to]);
    }
    lines.push_back(l);
  }

  Grid grid;
  try {
    grid = Grid(std::move(nodes), std::move(lines));
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", source, e.what()));
  }
  if (options.require_balanced) {
    for (const auto& b : balance_check(grid)) {
      if (!b.balanced) {
        throw BalanceError(fmt::format(
            "{}: component containing node {} is unbalanced (supply {}, demand {})", source,
            b.nodes.front(), b.supply, b.demand));
      }
    }
  }
  return grid;
}

Grid load_grid(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw GridError(fmt::format("cannot open grid file '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_grid(buf.str(), path.string(), options);
}

std::string serialize_grid(const Grid& grid) {
  std::string out;
  out += fmt::format("# {} nodes, {} lines\n", grid.node_count(), grid.line_count());
  for (const auto& n : grid.nodes()) {
    out += fmt::format("node {} {} {} ", n.id, format_number(n.coord.x), format_number(n.coord.y));
    switch (n.role.kind) {
      case NodeKind::supply:
        out += "supply " + format_number(n.role.power);
        break;
      case NodeKind::demand:
        out += "demand " + format_number(n.role.power);
        break;
      case NodeKind::neutral:
        out += "neutral";
        break;
    }
    out += '\n';
  }
  for (const auto& l : grid.lines()) {
    out += fmt::format("line {} {} {} x={}", l.id, l.from, l.to, format_number(l.reactance));
    if (l.capacity) out += " u=" + format_number(*l.capacity);
    out += '\n';
  }
  return out;
}

void save_grid(const Grid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GridError(fmt::format("cannot write grid file '{}'", path.string()));
  out << serialize_grid(grid);
}

}  // namespace gridcascade
