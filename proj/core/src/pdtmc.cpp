#include "sadeepdecs/pdtmc.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "sadeepdecs/text_io.hpp"

namespace sadeepdecs {

bool StateDecl::has_label(std::string_view label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

std::optional<std::size_t> Pdtmc::state_index(std::string_view name) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i].name == name) return i;
  return std::nullopt;
}

const ParamDecl* Pdtmc::find_param(std::string_view name) const {
  for (const auto& p : params)
    if (p.name == name) return &p;
  return nullptr;
}

std::vector<std::size_t> Dtmc::labelled(std::string_view label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i].has_label(label)) out.push_back(i);
  if (out.empty()) throw std::invalid_argument("unknown label '" + std::string(label) + "'");
  return out;
}

bool Dtmc::is_absorbing(std::size_t s) const {
  for (const auto& e : rows[s])
    if (e.dst != s && e.prob > 0.0) return false;
  return true;
}

std::string StochasticViolation::describe(const Dtmc& chain) const {
  std::string name = state < chain.states.size() ? chain.states[state].name : "?";
  if (kind == Kind::RowSum)
    return "state '" + name + "': outgoing probabilities sum to " + format_double(value);
  return "state '" + name + "': probability " + format_double(value) + " outside [0,1]";
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

struct RawEdge {
  std::size_t line;
  std::string src;
  std::string dst;
  std::string rhs;
};

// Splits "a -> b : rhs" into its three parts.
RawEdge split_edge(std::string_view body, std::size_t line) {
  const auto arrow = body.find("->");
  const auto colon = body.find(':');
  if (arrow == std::string_view::npos || colon == std::string_view::npos || colon < arrow)
    throw ModelError("expected '<src> -> <dst> : <value>'", line);
  RawEdge e{line, std::string(trim(body.substr(0, arrow))),
            std::string(trim(body.substr(arrow + 2, colon - arrow - 2))),
            std::string(trim(body.substr(colon + 1)))};
  if (!is_identifier(e.src) || !is_identifier(e.dst))
    throw ModelError("malformed state name in transition", line);
  if (e.rhs.empty()) throw ModelError("missing value after ':'", line);
  return e;
}

}  // namespace

Pdtmc parse_model(std::string_view text) {
  Pdtmc model;
  std::vector<RawEdge> trans, rewards;
  std::optional<std::pair<std::string, std::size_t>> init;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.back() != ';') throw ModelError("missing ';'", line_no);
    line = trim(line.substr(0, line.size() - 1));

    const auto sp = line.find_first_of(" \t");
    const std::string_view keyword = line.substr(0, sp);
    const std::string_view body = sp == std::string_view::npos ? "" : trim(line.substr(sp));

    if (keyword == "param") {
      // param <name> in [<lo>,<hi>]
      const auto in = body.find(" in ");
      const auto lb = body.find('[');
      const auto rb = body.find(']');
      if (in == std::string_view::npos || lb == std::string_view::npos ||
          rb == std::string_view::npos || rb < lb || trim(body.substr(rb + 1)) != "")
        throw ModelError("expected 'param <name> in [<lo>,<hi>]'", line_no);
      ParamDecl p;
      p.name = std::string(trim(body.substr(0, in)));
      if (!is_identifier(p.name)) throw ModelError("malformed parameter name", line_no);
      const auto bounds = split(body.substr(lb + 1, rb - lb - 1), ',');
      if (bounds.size() != 2) throw ModelError("parameter bounds need two values", line_no);
      try {
        p.lo = parse_double(bounds[0]);
        p.hi = parse_double(bounds[1]);
      } catch (const std::invalid_argument& e) {
        throw ModelError(e.what(), line_no);
      }
      if (p.lo > p.hi) throw ModelError("empty parameter range for '" + p.name + "'", line_no);
      if (model.find_param(p.name)) throw ModelError("duplicate parameter '" + p.name + "'", line_no);
      model.params.push_back(std::move(p));
    } else if (keyword == "state") {
      // state <name> [<label>,...]
      StateDecl s;
      const auto lb = body.find('[');
      s.name = std::string(trim(body.substr(0, lb)));
      if (!is_identifier(s.name)) throw ModelError("malformed state name", line_no);
      if (lb != std::string_view::npos) {
        const auto rb = body.find(']', lb);
        if (rb == std::string_view::npos || trim(body.substr(rb + 1)) != "")
          throw ModelError("unterminated label list", line_no);
        const auto inner = trim(body.substr(lb + 1, rb - lb - 1));
        if (!inner.empty()) {
          for (auto& label : split(inner, ',')) {
            if (!is_identifier(label)) throw ModelError("malformed label '" + label + "'", line_no);
            s.labels.push_back(std::move(label));
          }
        }
      }
      if (model.state_index(s.name)) throw ModelError("duplicate state '" + s.name + "'", line_no);
      model.states.push_back(std::move(s));
    } else if (keyword == "init") {
      if (init) throw ModelError("multiple init declarations", line_no);
      if (!is_identifier(body)) throw ModelError("expected 'init <state>'", line_no);
      init.emplace(std::string(body), line_no);
    } else if (keyword == "trans") {
      trans.push_back(split_edge(body, line_no));
    } else if (keyword == "reward") {
      rewards.push_back(split_edge(body, line_no));
    } else {
      throw ModelError("unknown statement '" + std::string(keyword) + "'", line_no);
    }
  }

  if (!init) throw ModelError("missing init declaration", 0);
  auto resolve = [&](const std::string& name, std::size_t line) {
    auto idx = model.state_index(name);
    if (!idx) throw ModelError("undeclared state '" + name + "'", line);
    return *idx;
  };
  model.initial = resolve(init->first, init->second);

  for (const auto& e : trans) {
    ParamTransition t;
    t.src = resolve(e.src, e.line);
    t.dst = resolve(e.dst, e.line);
    try {
      t.prob = parse_expr(e.rhs);
    } catch (const ExprError& err) {
      throw ModelError(err.what(), e.line);
    }
    std::set<std::string> used;
    t.prob.collect_params(used);
    for (const auto& name : used)
      if (!model.find_param(name)) throw ModelError("undeclared parameter '" + name + "'", e.line);
    model.transitions.push_back(std::move(t));
  }
  for (const auto& e : rewards) {
    TransitionReward r;
    r.src = resolve(e.src, e.line);
    r.dst = resolve(e.dst, e.line);
    try {
      r.value = parse_double(e.rhs);
    } catch (const std::invalid_argument&) {
      throw ModelError("reward must be a number", e.line);
    }
    if (!(r.value >= 0.0) || !std::isfinite(r.value))
      throw ModelError("reward must be finite and nonnegative", e.line);
    model.rewards.push_back(r);
  }
  return model;
}

std::string serialize_model(const Pdtmc& model) {
  std::ostringstream out;
  for (const auto& p : model.params)
    out << "param " << p.name << " in [" << format_double(p.lo) << "," << format_double(p.hi)
        << "];\n";
  for (const auto& s : model.states) {
    out << "state " << s.name;
    if (!s.labels.empty()) {
      out << " [";
      for (std::size_t i = 0; i < s.labels.size(); ++i) out << (i ? "," : "") << s.labels[i];
      out << "]";
    }
    out << ";\n";
  }
  out << "init " << model.states.at(model.initial).name << ";\n";
  for (const auto& t : model.transitions)
    out << "trans " << model.states.at(t.src).name << " -> " << model.states.at(t.dst).name
        << " : " << t.prob.to_string() << ";\n";
  for (const auto& r : model.rewards)
    out << "reward " << model.states.at(r.src).name << " -> " << model.states.at(r.dst).name
        << " : " << format_double(r.value) << ";\n";
  return out.str();
}

Pdtmc load_model(const std::string& path) { return parse_model(read_file(path)); }

// ---------------------------------------------------------------------------
// Instantiation

Dtmc instantiate(const Pdtmc& model, const Valuation& valuation) {
  for (const auto& p : model.params) {
    auto it = valuation.find(p.name);
    if (it == valuation.end()) throw InstantiationError("missing value for parameter '" + p.name + "'");
    const double v = it->second;
    if (!std::isfinite(v) || v < p.lo || v > p.hi)
      throw InstantiationError("parameter '" + p.name + "' = " + format_double(v) +
                               " outside [" + format_double(p.lo) + "," + format_double(p.hi) + "]");
  }

  const std::size_t n = model.states.size();
  std::vector<std::map<std::size_t, Edge>> acc(n);
  for (const auto& t : model.transitions) {
    double prob = 0.0;
    try {
      prob = t.prob.evaluate(valuation);
    } catch (const ExprError& e) {
      throw InstantiationError(e.what());
    }
    if (!std::isfinite(prob))
      throw InstantiationError("non-finite probability on " + model.states[t.src].name + " -> " +
                               model.states[t.dst].name);
    auto& edge = acc[t.src][t.dst];
    edge.dst = t.dst;
    edge.prob += prob;
  }
  for (const auto& r : model.rewards) {
    auto it = acc[r.src].find(r.dst);
    if (it != acc[r.src].end()) it->second.reward += r.value;
  }

  Dtmc chain;
  chain.states = model.states;
  chain.initial = model.initial;
  chain.rows.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (acc[s].empty()) {
      chain.rows[s].push_back(Edge{s, 1.0, 0.0});
      continue;
    }
    for (const auto& [dst, edge] : acc[s]) chain.rows[s].push_back(edge);
  }

  const auto violations = validate_stochastic(chain);
  if (!violations.empty()) {
    std::string msg = "instantiated chain is not stochastic:";
    for (const auto& v : violations) msg += "\n  " + v.describe(chain);
    throw InstantiationError(msg);
  }
  return chain;
}

std::vector<StochasticViolation> validate_stochastic(const Dtmc& chain) {
  std::vector<StochasticViolation> out;
  for (std::size_t s = 0; s < chain.rows.size(); ++s) {
    double sum = 0.0;
    for (const auto& e : chain.rows[s]) {
      sum += e.prob;
      if (!(e.prob >= 0.0 && e.prob <= 1.0))
        out.push_back({s, StochasticViolation::Kind::Range, e.prob});
    }
    if (!(std::abs(sum - 1.0) <= kStochasticTolerance))
      out.push_back({s, StochasticViolation::Kind::RowSum, sum});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reference chain

Pdtmc reference_model(const ModelConstants& constants) {
  if (!(constants.p_collider >= 0.0 && constants.p_collider <= 1.0) ||
      !(constants.p_occ >= 0.0 && constants.p_occ <= 1.0) || !(constants.t_move >= 0.0) ||
      !(constants.t_wait >= 0.0))
    throw std::invalid_argument("reference_model: invalid constants");

  Pdtmc m;
  for (const char* name : {"p_collider", "p_occ", "p00", "p01", "p10", "p11", "c1", "c2"})
    m.params.push_back({name, 0.0, 1.0});

  m.states = {{"check", {}},        {"encounter", {}},   {"danger", {}},
              {"safe", {}},         {"danger_pred0", {}}, {"danger_pred1", {}},
              {"safe_pred0", {}},   {"safe_pred1", {}},   {"done", {"done"}},
              {"collision", {"collision"}}};
  enum : std::size_t { Check, Encounter, Danger, Safe, DPred0, DPred1, SPred0, SPred1, Done, Collision };
  m.initial = Check;

  const auto P = [](const char* name) { return ParamExpr::param(name); };
  const auto one = ParamExpr::literal(1.0);
  auto trans = [&](std::size_t s, std::size_t d, ParamExpr e) { m.transitions.push_back({s, d, std::move(e)}); };
  auto reward = [&](std::size_t s, std::size_t d, double r) { m.rewards.push_back({s, d, r}); };

  trans(Check, Done, one - P("p_collider"));
  trans(Check, Encounter, P("p_collider"));
  trans(Encounter, Danger, P("p_occ"));
  trans(Encounter, Safe, one - P("p_occ"));
  trans(Danger, DPred0, P("p10"));
  trans(Danger, DPred1, P("p11"));
  trans(Safe, SPred0, P("p00"));
  trans(Safe, SPred1, P("p01"));
  trans(DPred0, Collision, P("c1"));
  trans(DPred0, Check, one - P("c1"));
  trans(DPred1, Collision, P("c2"));
  trans(DPred1, Check, one - P("c2"));
  trans(SPred0, Done, P("c1"));
  trans(SPred0, Check, one - P("c1"));
  trans(SPred1, Done, P("c2"));
  trans(SPred1, Check, one - P("c2"));
  trans(Done, Done, one);
  trans(Collision, Collision, one);

  reward(Check, Done, constants.t_move);
  for (std::size_t pred : {DPred0, DPred1, SPred0, SPred1}) {
    reward(pred, pred == DPred0 || pred == DPred1 ? Collision : Done, constants.t_move);
    reward(pred, Check, constants.t_wait);
  }
  return m;
}

Valuation reference_valuation(const ModelConstants& constants, const Valuation& rates_and_controls) {
  Valuation v = rates_and_controls;
  v["p_collider"] = constants.p_collider;
  v["p_occ"] = constants.p_occ;
  return v;
}

}  // namespace sadeepdecs
