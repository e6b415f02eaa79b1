#include "orthospec/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "orthospec/error.hpp"

namespace orthospec {

namespace {

[[noreturn]] void config_fail(const std::string& source, int line, const std::string& what) {
  std::ostringstream os;
  os << source;
  if (line > 0) os << ':' << line;
  os << ": " << what;
  fail(ErrorCode::kConfig, os.str());
}

// Character cursor over the whole text so arrays may span lines.
class Lexer {
 public:
  Lexer(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  bool done() const { return pos_ >= text_.size(); }
  int line() const { return line_; }
  char peek() const { return done() ? '\0' : text_[pos_]; }

  char get() {
    const char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  // Spaces and tabs only; newlines are significant outside arrays.
  void skip_inline() {
    while (!done() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) get();
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!done() && peek() != '\n') get();
    }
  }

  // Inside arrays: whitespace, newlines and comments.
  void skip_all() {
    for (;;) {
      skip_inline();
      if (peek() == '#') {
        skip_comment();
      } else if (peek() == '\n') {
        get();
      } else {
        return;
      }
    }
  }

  void expect_line_end() {
    skip_inline();
    skip_comment();
    if (!done() && peek() != '\n') error(std::string("unexpected '") + peek() + "'");
    if (!done()) get();
  }

  [[noreturn]] void error(const std::string& what) const { config_fail(source_, line_, what); }

  std::string bare_word() {
    std::string out;
    while (!done() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                       peek() == '-' || peek() == '.')) {
      out.push_back(get());
    }
    return out;
  }

  ConfigValue value() {
    ConfigValue v;
    v.line = line_;
    const char c = peek();
    if (c == '"') {
      v.data = string_literal();
    } else if (c == '[') {
      get();
      ConfigArray items;
      skip_all();
      while (peek() != ']') {
        if (done()) error("unterminated array");
        items.push_back(value());
        skip_all();
        if (done()) error("unterminated array");
        if (peek() == ',') {
          get();
          skip_all();
        } else if (peek() != ']') {
          error("expected ',' or ']' in array");
        }
      }
      get();
      v.data = std::move(items);
    } else {
      const std::string word = bare_word();
      if (word.empty()) error("expected a value");
      if (word == "true" || word == "false") {
        v.data = word == "true";
      } else {
        v.data = number(word);
      }
    }
    return v;
  }

 private:
  std::string string_literal() {
    get();  // opening quote
    std::string out;
    for (;;) {
      if (done() || peek() == '\n') error("unterminated string");
      const char c = get();
      if (c == '"') return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (done()) error("unterminated string");
      switch (const char e = get()) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        default: error(std::string("unknown escape '\\") + e + "'");
      }
    }
  }

  std::variant<bool, std::int64_t, double, std::string, ConfigArray> number(const std::string& w) {
    const char* first = w.data();
    const char* last = w.data() + w.size();
    if (*first == '+') ++first;
    const bool looks_float = w.find_first_of(".eE") != std::string::npos;
    if (!looks_float) {
      std::int64_t i = 0;
      auto [p, ec] = std::from_chars(first, last, i);
      if (ec == std::errc() && p == last) return i;
    }
    double d = 0.0;
    auto [p, ec] = std::from_chars(first, last, d);
    if (ec != std::errc() || p != last || !std::isfinite(d)) error("'" + w + "' is not a value");
    return d;
  }

  const std::string& text_;
  std::string source_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

std::string type_name(const ConfigValue& v) {
  switch (v.data.index()) {
    case 0: return "boolean";
    case 1: return "integer";
    case 2: return "float";
    case 3: return "string";
    default: return "array";
  }
}

// Typed access to one section with "source:line:" diagnostics and a record of
// which keys were consumed.
class Section {
 public:
  Section(const ConfigDocument& doc, const std::string& name) : doc_(doc), name_(name) {
    auto it = doc.sections.find(name);
    if (it != doc.sections.end()) entries_ = &it->second;
  }

  void get(const char* key, double& out) {
    if (const ConfigValue* v = find(key)) out = as_double(*v, key);
  }
  void get(const char* key, std::optional<double>& out) {
    if (const ConfigValue* v = find(key)) out = as_double(*v, key);
  }
  // std::size_t is also the seed type (64-bit unsigned on every supported target).
  void get(const char* key, std::size_t& out) {
    if (const ConfigValue* v = find(key)) {
      const std::int64_t i = as_int(*v, key);
      if (i < 0) bad(*v, key, "must be >= 0");
      out = static_cast<std::size_t>(i);
    }
  }
  void get(const char* key, int& out) {
    if (const ConfigValue* v = find(key)) out = static_cast<int>(as_int(*v, key));
  }
  void get(const char* key, bool& out) {
    if (const ConfigValue* v = find(key)) {
      if (const bool* b = std::get_if<bool>(&v->data)) {
        out = *b;
      } else {
        mismatch(*v, key, "a boolean");
      }
    }
  }
  void get(const char* key, std::string& out) {
    if (const ConfigValue* v = find(key)) out = as_string(*v, key);
  }
  void get(const char* key, std::vector<double>& out) {
    if (const ConfigValue* v = find(key)) {
      out.clear();
      for (const ConfigValue& item : as_array(*v, key)) out.push_back(as_double(item, key));
    }
  }
  void get(const char* key, std::vector<std::string>& out) {
    if (const ConfigValue* v = find(key)) {
      out.clear();
      for (const ConfigValue& item : as_array(*v, key)) out.push_back(as_string(item, key));
    }
  }

  // Validation hook: throws a located error when `ok` is false.
  void check(const char* key, bool ok, const std::string& what) const {
    if (ok) return;
    int line = 0;
    if (entries_) {
      auto it = entries_->find(key);
      if (it != entries_->end()) line = it->second.line;
    }
    config_fail(doc_.source, line, label(key) + " " + what);
  }

  void reject_unknown() const {
    if (!entries_) return;
    for (const auto& [key, value] : *entries_) {
      if (!used_.count(key)) config_fail(doc_.source, value.line, "unknown key " + label(key));
    }
  }

 private:
  std::string label(const std::string& key) const {
    return "'" + (name_.empty() ? key : name_ + "." + key) + "'";
  }

  const ConfigValue* find(const char* key) {
    used_.insert(key);
    if (!entries_) return nullptr;
    auto it = entries_->find(key);
    return it == entries_->end() ? nullptr : &it->second;
  }

  [[noreturn]] void mismatch(const ConfigValue& v, const std::string& key, const char* want) const {
    config_fail(doc_.source, v.line, label(key) + " expects " + want + ", got " + type_name(v));
  }
  [[noreturn]] void bad(const ConfigValue& v, const std::string& key, const char* what) const {
    config_fail(doc_.source, v.line, label(key) + " " + what);
  }

  double as_double(const ConfigValue& v, const std::string& key) const {
    if (const double* d = std::get_if<double>(&v.data)) return *d;
    if (const std::int64_t* i = std::get_if<std::int64_t>(&v.data)) return static_cast<double>(*i);
    mismatch(v, key, "a number");
  }
  std::int64_t as_int(const ConfigValue& v, const std::string& key) const {
    if (const std::int64_t* i = std::get_if<std::int64_t>(&v.data)) return *i;
    mismatch(v, key, "an integer");
  }
  const std::string& as_string(const ConfigValue& v, const std::string& key) const {
    if (const std::string* s = std::get_if<std::string>(&v.data)) return *s;
    mismatch(v, key, "a string");
  }
  const ConfigArray& as_array(const ConfigValue& v, const std::string& key) const {
    if (const ConfigArray* a = std::get_if<ConfigArray>(&v.data)) return *a;
    mismatch(v, key, "an array");
  }

  const ConfigDocument& doc_;
  std::string name_;
  const std::map<std::string, ConfigValue>* entries_ = nullptr;
  std::set<std::string> used_;
};

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, p);
  // Keep floats recognizable as floats when read back.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out + "\"";
}

template <class T, class F>
std::string array_of(const std::vector<T>& items, F&& fmt) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += fmt(items[i]);
  }
  return out + "]";
}

double parse_number(const std::string& text, const std::string& what) {
  double d = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [p, ec] = std::from_chars(first, last, d);
  if (ec != std::errc() || p != last || !std::isfinite(d)) {
    fail(ErrorCode::kConfig, what + ": '" + text + "' is not a number");
  }
  return d;
}

}  // namespace

ConfigDocument parse_config_text(const std::string& text, const std::string& source) {
  ConfigDocument doc;
  doc.source = source;
  auto& section_lines = doc.section_lines;
  std::string section;
  doc.sections[section];
  Lexer lex(text, source);
  while (!lex.done()) {
    lex.skip_inline();
    if (lex.peek() == '#' || lex.peek() == '\n' || lex.done()) {
      lex.expect_line_end();
      continue;
    }
    if (lex.peek() == '[') {
      lex.get();
      lex.skip_inline();
      section = lex.bare_word();
      if (section.empty()) lex.error("empty section name");
      lex.skip_inline();
      if (lex.peek() != ']') lex.error("expected ']' after section name");
      lex.get();
      if (section_lines.count(section)) {
        lex.error("section [" + section + "] repeated (first at line " +
                  std::to_string(section_lines[section]) + ")");
      }
      section_lines[section] = lex.line();
      doc.sections[section];
      lex.expect_line_end();
      continue;
    }
    const int key_line = lex.line();
    const std::string key = lex.bare_word();
    if (key.empty()) lex.error(std::string("expected a key, got '") + lex.peek() + "'");
    lex.skip_inline();
    if (lex.peek() != '=') lex.error("expected '=' after key '" + key + "'");
    lex.get();
    lex.skip_inline();
    ConfigValue v = lex.value();
    v.line = key_line;
    auto& entries = doc.sections[section];
    if (entries.count(key)) {
      config_fail(source, key_line, "key '" + key + "' repeated (first at line " +
                                        std::to_string(entries[key].line) + ")");
    }
    entries.emplace(key, std::move(v));
    lex.expect_line_end();
  }
  return doc;
}

ConfigDocument parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kConfig, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

ProcessingSpec parse_func(const std::string& text) {
  ProcessingSpec spec;
  const auto colon = text.find(':');
  spec.kind = parse_processing_kind(text.substr(0, colon));
  if (colon == std::string::npos) {
    require(spec.kind != ProcessingKind::kCustom, ErrorCode::kConfig,
            "custom function needs knots=s/t,...");
    return spec;
  }
  std::stringstream params(text.substr(colon + 1));
  std::string item;
  while (std::getline(params, item, ';')) {
    const auto eq = item.find('=');
    require(eq != std::string::npos, ErrorCode::kConfig,
            "function parameter '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "c1" && spec.kind == ProcessingKind::kSubset) {
      spec.c1 = parse_number(value, text);
    } else if (key == "c2" && spec.kind == ProcessingKind::kTrim) {
      spec.c2 = parse_number(value, text);
    } else if (key == "kappa" && spec.kind == ProcessingKind::kStarRegularized) {
      spec.kappa = parse_number(value, text);
    } else if (key == "knots" && spec.kind == ProcessingKind::kCustom) {
      std::stringstream knots(value);
      std::string knot;
      while (std::getline(knots, knot, ',')) {
        const auto slash = knot.find('/');
        require(slash != std::string::npos, ErrorCode::kConfig, "knot '" + knot + "' is not s/t");
        spec.table.emplace_back(parse_number(knot.substr(0, slash), text),
                                parse_number(knot.substr(slash + 1), text));
      }
    } else {
      fail(ErrorCode::kConfig,
           "parameter '" + key + "' does not apply to " + to_string(spec.kind));
    }
  }
  require(spec.kind != ProcessingKind::kCustom || !spec.table.empty(), ErrorCode::kConfig,
          "custom function needs knots=s/t,...");
  return spec;
}

std::string format_func(const ProcessingSpec& spec) {
  std::string out = to_string(spec.kind);
  switch (spec.kind) {
    case ProcessingKind::kTrim: return out + ":c2=" + format_double(spec.c2);
    case ProcessingKind::kSubset: return out + ":c1=" + format_double(spec.c1);
    case ProcessingKind::kStarRegularized: return out + ":kappa=" + format_double(spec.kappa);
    case ProcessingKind::kCustom: {
      out += ":knots=";
      for (std::size_t i = 0; i < spec.table.size(); ++i) {
        if (i) out += ",";
        out += format_double(spec.table[i].first) + "/" + format_double(spec.table[i].second);
      }
      return out;
    }
    default: return out;
  }
}

ExperimentConfig config_from_document(const ConfigDocument& doc) {
  static const std::set<std::string> known{"", "quadrature", "predict", "sweep", "pcaep",
                                           "spectrum"};
  for (const auto& [name, entries] : doc.sections) {
    if (!known.count(name)) {
      auto it = doc.section_lines.find(name);
      const int line = it != doc.section_lines.end() ? it->second
                       : entries.empty()             ? 0
                                                     : entries.begin()->second.line;
      config_fail(doc.source, line, "unknown section [" + name + "]");
    }
  }

  ExperimentConfig cfg;
  auto check_func = [&](Section& s, const char* key, const std::string& value) {
    try {
      (void)parse_func(value);
    } catch (const Error& e) {
      s.check(key, false, std::string("is not a valid function: ") + e.what());
    }
  };
  auto check_kind = [&](Section& s, const char* key, const std::string& value) {
    try {
      (void)parse_sensing_kind(value);
    } catch (const Error& e) {
      s.check(key, false, std::string("is not a valid ensemble: ") + e.what());
    }
  };

  Section top(doc, "");
  top.get("seed", cfg.seed);
  top.get("output_dir", cfg.output_dir);
  top.get("threads", cfg.threads);
  top.check("threads", cfg.threads >= 0, "must be >= 0");
  top.reject_unknown();

  Section q(doc, "quadrature");
  std::string scheme = cfg.quadrature.scheme == QuadratureScheme::kComposite ? "composite" : "laguerre";
  q.get("scheme", scheme);
  q.check("scheme", scheme == "composite" || scheme == "laguerre",
          "must be \"composite\" or \"laguerre\"");
  cfg.quadrature.scheme = scheme == "composite" ? QuadratureScheme::kComposite
                                                : QuadratureScheme::kLaguerre;
  q.get("node_count", cfg.quadrature.node_count);
  q.get("panel_order", cfg.quadrature.panel_order);
  q.get("cutoff", cfg.quadrature.cutoff);
  q.get("abs_tol", cfg.quadrature.abs_tol);
  q.get("mc_samples", cfg.quadrature.mc_samples);
  q.get("mc_seed", cfg.quadrature.mc_seed);
  q.check("node_count", cfg.quadrature.node_count >= 2, "must be >= 2");
  q.check("panel_order", cfg.quadrature.panel_order >= 2, "must be >= 2");
  q.check("cutoff", cfg.quadrature.cutoff > 0.0, "must be > 0");
  q.check("abs_tol", cfg.quadrature.abs_tol > 0.0, "must be > 0");
  q.reject_unknown();

  Section p(doc, "predict");
  p.get("funcs", cfg.predict.funcs);
  p.get("delta_grid", cfg.predict.delta_grid);
  p.get("mu_points", cfg.predict.mu_points);
  p.get("threshold_delta_max", cfg.predict.threshold_delta_max);
  p.get("thresholds", cfg.predict.thresholds);
  for (const auto& f : cfg.predict.funcs) check_func(p, "funcs", f);
  for (double d : cfg.predict.delta_grid) p.check("delta_grid", d > 1.0, "entries must exceed 1");
  p.check("mu_points", cfg.predict.mu_points >= 2, "must be >= 2");
  p.check("threshold_delta_max", cfg.predict.threshold_delta_max > 1.001, "must exceed 1.001");
  p.reject_unknown();

  Section s(doc, "sweep");
  s.get("ensembles", cfg.sweep.ensembles);
  s.get("funcs", cfg.sweep.funcs);
  s.get("delta_grid", cfg.sweep.delta_grid);
  s.get("n", cfg.sweep.n);
  s.get("trials", cfg.sweep.trials);
  s.get("haar_n_cap", cfg.sweep.haar_n_cap);
  s.get("max_iter", cfg.sweep.max_iter);
  s.get("tol", cfg.sweep.tol);
  for (const auto& e : cfg.sweep.ensembles) check_kind(s, "ensembles", e);
  for (const auto& f : cfg.sweep.funcs) check_func(s, "funcs", f);
  for (double d : cfg.sweep.delta_grid) s.check("delta_grid", d > 1.0, "entries must exceed 1");
  s.check("n", cfg.sweep.n >= 2, "must be >= 2");
  s.check("trials", cfg.sweep.trials >= 1, "must be >= 1");
  s.check("max_iter", cfg.sweep.max_iter >= 1, "must be >= 1");
  s.check("tol", cfg.sweep.tol > 0.0, "must be > 0");
  s.reject_unknown();

  Section e(doc, "pcaep");
  e.get("ensemble", cfg.pcaep.ensemble);
  e.get("func", cfg.pcaep.func);
  e.get("n", cfg.pcaep.n);
  e.get("delta", cfg.pcaep.delta);
  e.get("mu", cfg.pcaep.mu);
  e.get("alpha0", cfg.pcaep.alpha0);
  e.get("sigma0", cfg.pcaep.sigma0);
  e.get("t_max", cfg.pcaep.t_max);
  e.get("seeds", cfg.pcaep.seeds);
  check_kind(e, "ensemble", cfg.pcaep.ensemble);
  check_func(e, "func", cfg.pcaep.func);
  e.check("delta", cfg.pcaep.delta > 1.0, "must exceed 1");
  e.check("sigma0", cfg.pcaep.sigma0 >= 0.0, "must be >= 0");
  e.check("mu", !cfg.pcaep.mu || *cfg.pcaep.mu != 0.0, "must be nonzero");
  e.check("seeds", cfg.pcaep.seeds >= 1, "must be >= 1");
  e.reject_unknown();

  Section sp(doc, "spectrum");
  sp.get("ensemble", cfg.spectrum.ensemble);
  sp.get("func", cfg.spectrum.func);
  sp.get("n", cfg.spectrum.n);
  sp.get("delta", cfg.spectrum.delta);
  sp.get("branch", cfg.spectrum.branch);
  sp.get("cap", cfg.spectrum.cap);
  sp.get("with_e", cfg.spectrum.with_e);
  check_kind(sp, "ensemble", cfg.spectrum.ensemble);
  check_func(sp, "func", cfg.spectrum.func);
  sp.check("delta", cfg.spectrum.delta > 1.0, "must exceed 1");
  sp.check("branch", cfg.spectrum.branch == "max" || cfg.spectrum.branch == "min",
           "must be \"max\" or \"min\"");
  sp.reject_unknown();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  return config_from_document(parse_config_file(path));
}

std::string to_config_text(const ExperimentConfig& cfg) {
  auto num = [](double v) { return format_double(v); };
  auto str = [](const std::string& v) { return quote(v); };
  std::ostringstream os;
  os << "seed = " << cfg.seed << "\n";
  os << "output_dir = " << quote(cfg.output_dir) << "\n";
  os << "threads = " << cfg.threads << "\n";

  const QuadratureSpec& q = cfg.quadrature;
  os << "\n[quadrature]\n";
  os << "scheme = " << (q.scheme == QuadratureScheme::kComposite ? "\"composite\"" : "\"laguerre\"")
     << "\n";
  os << "node_count = " << q.node_count << "\n";
  os << "panel_order = " << q.panel_order << "\n";
  os << "cutoff = " << num(q.cutoff) << "\n";
  os << "abs_tol = " << num(q.abs_tol) << "\n";
  os << "mc_samples = " << q.mc_samples << "\n";
  os << "mc_seed = " << q.mc_seed << "\n";

  const PredictConfig& p = cfg.predict;
  os << "\n[predict]\n";
  os << "funcs = " << array_of(p.funcs, str) << "\n";
  os << "delta_grid = " << array_of(p.delta_grid, num) << "\n";
  os << "mu_points = " << p.mu_points << "\n";
  os << "threshold_delta_max = " << num(p.threshold_delta_max) << "\n";
  os << "thresholds = " << (p.thresholds ? "true" : "false") << "\n";

  const SweepConfig& s = cfg.sweep;
  os << "\n[sweep]\n";
  os << "ensembles = " << array_of(s.ensembles, str) << "\n";
  os << "funcs = " << array_of(s.funcs, str) << "\n";
  os << "delta_grid = " << array_of(s.delta_grid, num) << "\n";
  os << "n = " << s.n << "\n";
  os << "trials = " << s.trials << "\n";
  os << "haar_n_cap = " << s.haar_n_cap << "\n";
  os << "max_iter = " << s.max_iter << "\n";
  os << "tol = " << num(s.tol) << "\n";

  const PcaepConfig& e = cfg.pcaep;
  os << "\n[pcaep]\n";
  os << "ensemble = " << quote(e.ensemble) << "\n";
  os << "func = " << quote(e.func) << "\n";
  os << "n = " << e.n << "\n";
  os << "delta = " << num(e.delta) << "\n";
  if (e.mu) {
    os << "mu = " << num(*e.mu) << "\n";
  } else {
    os << "# mu = <value>  (default: mu_hat)\n";
  }
  os << "alpha0 = " << num(e.alpha0) << "\n";
  os << "sigma0 = " << num(e.sigma0) << "\n";
  os << "t_max = " << e.t_max << "\n";
  os << "seeds = " << e.seeds << "\n";

  const SpectrumConfig& sp = cfg.spectrum;
  os << "\n[spectrum]\n";
  os << "ensemble = " << quote(sp.ensemble) << "\n";
  os << "func = " << quote(sp.func) << "\n";
  os << "n = " << sp.n << "\n";
  os << "delta = " << num(sp.delta) << "\n";
  os << "branch = " << quote(sp.branch) << "\n";
  os << "cap = " << sp.cap << "\n";
  os << "with_e = " << (sp.with_e ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace orthospec
