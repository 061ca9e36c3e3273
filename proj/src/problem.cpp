#include "cartan/problem.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cartan/parser.hpp"

namespace cartan {

namespace {

struct Line {
  std::size_t number;
  std::string text;
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

// commas inside parentheses belong to function arguments
std::vector<std::string> split_top(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

// "key: value" with a bare-word key
std::optional<std::pair<std::string, std::string>> key_value(const std::string& s) {
  auto colon = s.find(':');
  if (colon == std::string::npos) return std::nullopt;
  std::string key = trim(s.substr(0, colon));
  if (key.empty() || key.find_first_of(" \t(") != std::string::npos) return std::nullopt;
  return std::make_pair(key, trim(s.substr(colon + 1)));
}

class Loader {
 public:
  Loader(const std::string& text, std::string source) : source_(std::move(source)) {
    std::istringstream is(text);
    std::string raw;
    std::string section;
    for (std::size_t no = 1; std::getline(is, raw); ++no) {
      auto hash = raw.find('#');
      std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') fail(no, "unterminated section header");
        section = trim(s.substr(1, s.size() - 2));
        static const std::set<std::string> known{"coordinates", "functions", "coframe",
                                                 "coframe matrix", "group", "policy"};
        if (!known.count(section)) fail(no, "unknown section [" + section + "]");
        if (sections_.count(section)) fail(no, "section [" + section + "] given twice");
        sections_[section];
        header_[section] = no;
        continue;
      }
      if (section.empty()) {
        auto kv = key_value(s);
        if (!kv || kv->first != "title") fail(no, "expected 'title:' or a section header");
        out_.title = kv->second;
        continue;
      }
      sections_[section].push_back({no, s});
    }
  }

  ProblemFile load() {
    require("coordinates");
    require("group");
    if (sections_.count("coframe") == sections_.count("coframe matrix"))
      fail(0, "exactly one of [coframe] and [coframe matrix] is required");
    coordinates();
    functions();
    ExprMatrix A = sections_.count("coframe") ? coframe_forms() : coframe_matrix();
    group();
    policy();

    std::vector<std::string> names;
    for (std::size_t i = 0; i < n_; ++i) names.push_back("eta" + std::to_string(i + 1));
    for (std::size_t i = 0; i < n_ && i < form_names_.size(); ++i)
      if (!form_names_[i].empty()) names[i] = form_names_[i];
    if (determinant(A).is_zero())
      fail(header_.count("coframe") ? header_["coframe"] : header_["coframe matrix"],
           "coframe is not invertible: determinant is identically zero");
    auto& p = out_.problem;
    p.chart = Chart(coords_);
    try {
      p.coframe = std::make_shared<const Coframe>(p.chart, names, A);
      p.validate();
    } catch (const std::exception& e) {
      fail(header_["group"], e.what());
    }
    auto closure = check_closure(p.group, 8, out_.policy.seed + 1);
    if (!closure.ok) fail(header_["group"], "closure check failed: " + closure.diagnostic);
    return std::move(out_);
  }

 private:
  [[noreturn]] void fail(std::size_t line, const std::string& msg) const {
    throw ProblemError(source_, line, msg);
  }

  void require(const std::string& s) {
    if (!sections_.count(s)) fail(0, "missing section [" + s + "]");
  }

  Expr expr(const Line& l, const std::string& text, const ParseContext& ctx = {}) const {
    try {
      return parse_expr(text, ctx);
    } catch (const ParseError& e) {
      fail(l.number, e.what());
    } catch (const std::exception& e) {
      fail(l.number, e.what());
    }
  }

  void coordinates() {
    for (const auto& l : sections_["coordinates"])
      for (const auto& w : words(l.text)) {
        try {
          Symbol s = declare_symbol(w, SymbolKind::coordinate);
          for (Symbol c : coords_)
            if (c == s) fail(l.number, "coordinate " + w + " listed twice");
          coords_.push_back(s);
        } catch (const std::invalid_argument& e) {
          fail(l.number, e.what());
        }
      }
    n_ = coords_.size();
    if (n_ == 0) fail(header_["coordinates"], "no coordinates");
  }

  // L(x, u, p) declares an opaque function with those slot names
  void functions() {
    if (!sections_.count("functions")) return;
    for (const auto& l : sections_["functions"]) {
      auto open = l.text.find('(');
      if (open == std::string::npos || l.text.back() != ')')
        fail(l.number, "expected name(slot, ...)");
      std::string name = trim(l.text.substr(0, open));
      std::vector<std::string> slots;
      for (auto& s : split_top(l.text.substr(open + 1, l.text.size() - open - 2))) {
        if (s.empty()) fail(l.number, "empty slot name");
        slots.push_back(s);
      }
      try {
        declare_function(name, slots);
      } catch (const std::invalid_argument& e) {
        fail(l.number, e.what());
      }
    }
  }

  // rows like "du - p*dx", optionally named "eta2 = du - p*dx"
  ExprMatrix coframe_forms() {
    const auto& lines = sections_["coframe"];
    if (lines.size() != n_)
      fail(header_["coframe"], "expected " + std::to_string(n_) + " coframe rows, got " +
                                   std::to_string(lines.size()));
    ParseContext ctx;
    std::vector<Symbol> d;
    for (Symbol c : coords_) {
      Symbol s = declare_symbol("d:" + c.name(), SymbolKind::auxiliary);
      d.push_back(s);
      ctx.definitions["d" + c.name()] = Expr(s);
    }
    ExprMatrix A(n_, n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const Line& l = lines[i];
      std::string body = l.text;
      std::string name;
      auto eq = body.find('=');
      if (eq != std::string::npos) {
        name = trim(body.substr(0, eq));
        body = body.substr(eq + 1);
      }
      form_names_.push_back(name);
      Expr e = expr(l, body, ctx);
      Expr rest = e;
      for (std::size_t j = 0; j < n_; ++j) {
        A(i, j) = differentiate(e, d[j]);
        rest -= A(i, j) * Expr(d[j]);
      }
      bool linear = rest.is_zero();
      for (std::size_t j = 0; j < n_ && linear; ++j)
        for (Symbol s : d) linear = linear && !depends_on(A(i, j), s);
      if (!linear) fail(l.number, "coframe row is not a linear combination of the coordinate differentials");
    }
    return A;
  }

  ExprMatrix coframe_matrix() {
    const auto& lines = sections_["coframe matrix"];
    if (lines.size() != n_)
      fail(header_["coframe matrix"], "expected " + std::to_string(n_) + " matrix rows, got " +
                                          std::to_string(lines.size()));
    ExprMatrix A(n_, n_);
    for (std::size_t i = 0; i < n_; ++i) {
      auto cells = split_top(lines[i].text);
      if (cells.size() != n_)
        fail(lines[i].number, "expected " + std::to_string(n_) + " entries, got " +
                                  std::to_string(cells.size()));
      for (std::size_t j = 0; j < n_; ++j) A(i, j) = expr(lines[i], cells[j]);
    }
    return A;
  }

  Rational rational(const Line& l, const std::string& text) const {
    Expr e = expr(l, text);
    if (!e.is_constant()) fail(l.number, "expected a rational constant, got " + text);
    return e.constant_value();
  }

  void group() {
    auto& g = out_.problem.group;
    std::vector<Line> rows;
    std::vector<std::string> identity;
    const Line* identity_line = nullptr;
    bool have_params = false;
    std::vector<Line> membership;
    for (const auto& l : sections_["group"]) {
      auto kv = key_value(l.text);
      if (!kv) fail(l.number, "expected 'params:', 'identity:', 'row:' or 'membership:'");
      if (kv->first == "params") {
        if (have_params) fail(l.number, "params given twice");
        have_params = true;
        for (const auto& w : words(kv->second)) {
          try {
            g.params.push_back(declare_symbol(w, SymbolKind::group_parameter));
          } catch (const std::invalid_argument& e) {
            fail(l.number, e.what());
          }
        }
      } else if (kv->first == "identity") {
        identity = words(kv->second);
        identity_line = &l;
      } else if (kv->first == "row") {
        rows.push_back({l.number, kv->second});
      } else if (kv->first == "membership") {
        membership.push_back({l.number, kv->second});
      } else {
        fail(l.number, "unknown group key '" + kv->first + "'");
      }
    }
    if (!have_params) fail(header_["group"], "missing 'params:' (may be empty)");
    if (rows.size() != n_)
      fail(header_["group"], "expected " + std::to_string(n_) + " group rows, got " +
                                 std::to_string(rows.size()));
    if (identity.size() != g.params.size())
      fail(identity_line ? identity_line->number : header_["group"],
           "identity lists " + std::to_string(identity.size()) + " values for " +
               std::to_string(g.params.size()) + " parameters");
    for (std::size_t k = 0; k < identity.size(); ++k)
      g.identity[g.params[k].id()] = rational(*identity_line, identity[k]);
    g.entries = ExprMatrix(n_, n_);
    for (std::size_t i = 0; i < n_; ++i) {
      auto cells = split_top(rows[i].text);
      if (cells.size() != n_)
        fail(rows[i].number, "expected " + std::to_string(n_) + " entries, got " +
                                 std::to_string(cells.size()));
      for (std::size_t j = 0; j < n_; ++j) g.entries(i, j) = expr(rows[i], cells[j]);
    }
    auto slots = slot_symbols(n_);
    Bindings at;
    for (std::size_t e = 0; e < n_ * n_; ++e) at[slots[e].id()] = g.entries(e / n_, e % n_);
    for (const auto& l : membership) {
      Expr m = expr(l, l.text);
      for (Symbol s : symbols_in(m))
        if (std::find(slots.begin(), slots.end(), s) == slots.end())
          fail(l.number, "membership equation uses " + s.name() + "; only matrix slots g11.. are allowed");
      if (!substitute(m, at).is_zero())
        fail(l.number, "membership equation does not vanish on the group matrix");
      g.membership.push_back(m);
    }
  }

  void policy() {
    if (!sections_.count("policy")) return;
    auto& pol = out_.policy;
    for (const auto& l : sections_["policy"]) {
      auto kv = key_value(l.text);
      if (kv && kv->first == "max-loops") {
        Rational v = rational(l, kv->second);
        if (v.get_den() != 1 || v < 0) fail(l.number, "max-loops must be a nonnegative integer");
        pol.max_loops = static_cast<int>(v.get_num().get_si());
      } else if (kv && kv->first == "seed") {
        Rational v = rational(l, kv->second);
        if (v.get_den() != 1 || v < 0) fail(l.number, "seed must be a nonnegative integer");
        pol.seed = v.get_num().get_ui();
      } else if (kv && kv->first == "target") {
        auto w = words(kv->second);
        if (w.size() != 2) fail(l.number, "expected 'target: <label> <value>'");
        pol.targets[w[0]] = rational(l, w[1]);
      } else {
        fail(l.number, "expected 'max-loops:', 'seed:' or 'target:'");
      }
    }
  }

  std::string source_;
  std::map<std::string, std::vector<Line>> sections_;
  std::map<std::string, std::size_t> header_;
  ProblemFile out_;
  std::vector<Symbol> coords_;
  std::vector<std::string> form_names_;
  std::size_t n_ = 0;
};

using json = nlohmann::ordered_json;

std::string q(const Rational& r) { return r.get_str(); }

json strings(const std::vector<Expr>& es) {
  json a = json::array();
  for (const auto& e : es) a.push_back(e.str());
  return a;
}

json matrix(const ExprMatrix& m) {
  json a = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j).str());
    a.push_back(row);
  }
  return a;
}

json relations(const std::vector<std::pair<Symbol, Expr>>& rs) {
  json o = json::object();
  for (const auto& [s, e] : rs) o[s.name()] = e.str();
  return o;
}

json reduction(const ReductionRecord& r) {
  json o;
  o["residuals"] = strings(r.residuals);
  o["labels"] = r.labels;
  json t = json::array();
  for (const auto& v : r.targets) t.push_back(q(v));
  o["targets"] = t;
  o["notes"] = r.branch_notes;
  o["normalization"] = relations(r.normalization);
  o["section"] = matrix(r.section);
  o["isotropy"] = relations(r.isotropy);
  o["transitive"] = r.transitive;
  o["genuine"] = strings(r.genuine);
  return o;
}

json characters(const CharacterReport& c) {
  json o;
  o["s"] = c.s;
  o["r2"] = c.r2;
  o["involutive"] = c.involutive;
  o["certified"] = c.certified;
  json w = json::array();
  for (const auto& v : c.witnesses) {
    json row = json::array();
    for (const auto& x : v) row.push_back(q(x));
    w.push_back(row);
  }
  o["witnesses"] = w;
  return o;
}

json stage(const StageReport& s) {
  json o;
  o["stage"] = s.stage;
  o["n"] = s.n;
  o["r"] = s.r;
  o["coframe"] = s.coframe;
  o["group"] = s.group;
  o["params"] = s.params;
  json mc = json::array();
  for (const auto& e : s.mc_basis) mc.push_back({e[0] + 1, e[1] + 1});
  o["mc_basis"] = mc;
  o["equations"] = s.equations;
  o["unknowns"] = s.unknowns;
  o["r2"] = s.r2;
  json tor = json::array();
  for (const auto& t : s.torsion)
    tor.push_back({{"expr", t.expr}, {"label", t.label}, {"kind", to_string(t.kind)}});
  o["torsion"] = tor;
  o["reduction"] = s.reduction ? reduction(*s.reduction) : json(nullptr);
  o["characters"] = s.characters ? characters(*s.characters) : json(nullptr);
  o["cartan_test"] = s.cartan_test ? json(*s.cartan_test) : json(nullptr);
  o["verdict"] = s.verdict;
  return o;
}

}  // namespace

ProblemFile parse_problem(const std::string& text, const std::string& source) {
  return Loader(text, source).load();
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProblemError(path, 0, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str(), path);
}

std::string report_json(const EquivalenceReport& r) {
  json o;
  o["title"] = r.title;
  o["outcome"] = to_string(r.outcome);
  o["exit_code"] = r.exit_code();
  o["seed"] = r.seed;
  json st = json::array();
  for (const auto& s : r.stages) st.push_back(stage(s));
  o["stages"] = st;
  o["invariants"] = r.invariants;
  o["diagnostic"] = r.diagnostic;
  return o.dump(2) + "\n";
}

std::string report_text(const EquivalenceReport& r) {
  std::ostringstream os;
  if (!r.title.empty()) os << r.title << "\n";
  for (const auto& s : r.stages) {
    os << "stage " << s.stage << ": n=" << s.n << " r=" << s.r << " equations=" << s.equations
       << " unknowns=" << s.unknowns << " r2=" << s.r2 << "\n";
    for (std::size_t i = 0; i < s.coframe.size(); ++i) os << "  theta" << i + 1 << " = " << s.coframe[i] << "\n";
    for (const auto& t : s.torsion)
      if (t.kind != TorsionKind::trivial)
        os << "  torsion [" << to_string(t.kind) << "] " << t.label << ": " << t.expr << "\n";
    if (s.reduction) {
      const auto& red = *s.reduction;
      for (std::size_t k = 0; k < red.residuals.size(); ++k)
        os << "  normalize " << red.residuals[k] << " -> " << q(red.targets[k]) << "\n";
      for (const auto& [p, e] : red.normalization) os << "    " << p.name() << " = " << e << "\n";
      for (const auto& [p, e] : red.isotropy) os << "  isotropy " << p.name() << " = " << e << "\n";
      for (const auto& n : red.branch_notes) os << "  note: " << n << "\n";
    }
    if (s.characters) {
      os << "  characters s=(";
      for (std::size_t k = 0; k < s.characters->s.size(); ++k)
        os << (k ? "," : "") << s.characters->s[k];
      os << ")";
      if (s.cartan_test) os << " cartan test " << (*s.cartan_test ? "passes" : "fails");
      os << "\n";
    }
    os << "  verdict: " << s.verdict << "\n";
  }
  for (const auto& inv : r.invariants) os << "invariant: " << inv << "\n";
  os << "outcome: " << to_string(r.outcome) << "\n";
  if (!r.diagnostic.empty()) os << "diagnostic: " << r.diagnostic << "\n";
  return os.str();
}

}  // namespace cartan
