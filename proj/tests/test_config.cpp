#include <doctest.h>

#include <string>

#include "orthospec/config.hpp"
#include "orthospec/error.hpp"

using namespace orthospec;

namespace {

// Message of the config error raised by parsing and resolving text.
std::string error_of(const std::string& text) {
  try {
    (void)config_from_document(parse_config_text(text, "t.toml"));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfig);
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) {
  return s.find(part) != std::string::npos;
}

}  // namespace

TEST_CASE("empty text gives the defaults") {
  const ExperimentConfig cfg = config_from_document(parse_config_text(""));
  CHECK(cfg == ExperimentConfig{});
  CHECK(cfg.predict.delta_grid.front() == 2.1);
  CHECK(cfg.sweep.n == 2048);
}

TEST_CASE("values, sections and multi-line arrays") {
  const std::string text = R"(# comment
seed = 42
output_dir = "runs/a b"   # trailing comment

[predict]
funcs = [
  "star",        # first
  "trim:c2=0.8",
]
delta_grid = [2, 2.5, 3e0]
thresholds = false

[pcaep]
mu = 0.25
alpha0 = 1
)";
  const ConfigDocument doc = parse_config_text(text);
  CHECK(doc.sections.at("").at("seed").line == 2);
  CHECK(doc.sections.at("predict").at("delta_grid").line == 10);
  const ExperimentConfig cfg = config_from_document(doc);
  CHECK(cfg.seed == 42);
  CHECK(cfg.output_dir == "runs/a b");
  CHECK(cfg.predict.funcs == std::vector<std::string>{"star", "trim:c2=0.8"});
  CHECK(cfg.predict.delta_grid == std::vector<double>{2.0, 2.5, 3.0});
  CHECK_FALSE(cfg.predict.thresholds);
  REQUIRE(cfg.pcaep.mu);
  CHECK(*cfg.pcaep.mu == 0.25);
  CHECK(cfg.pcaep.alpha0 == 1.0);
}

TEST_CASE("errors name the file and line") {
  CHECK(contains(error_of("seed = 1\nbogus = 2\n"), "t.toml:2:"));
  CHECK(contains(error_of("seed = 1\nbogus = 2\n"), "unknown key"));
  CHECK(contains(error_of("\n\n[nope]\n"), "t.toml:3:"));
  CHECK(contains(error_of("seed = 1\nseed = 2\n"), "repeated (first at line 1)"));
  CHECK(contains(error_of("[sweep]\nn = 1\n[sweep]\n"), "t.toml:3:"));
  CHECK(contains(error_of("output_dir = \"abc\n"), "unterminated string"));
  CHECK(contains(error_of("[predict]\ndelta_grid = [2.0,\n 3.0\n"), "unterminated array"));
  CHECK(contains(error_of("seed = \"one\"\n"), "expects an integer"));
  CHECK(contains(error_of("[sweep]\n\nn = 2.5\n"), "t.toml:3:"));
  CHECK(contains(error_of("[predict]\ndelta_grid = [0.5]\n"), "must exceed 1"));
  CHECK(contains(error_of("[spectrum]\nbranch = \"side\"\n"), "t.toml:2:"));
  CHECK(contains(error_of("[pcaep]\nfunc = \"nope\"\n"), "t.toml:2:"));
  CHECK(contains(error_of("[sweep]\nensembles = [\"gaussian\"]\n"), "t.toml:2:"));
  CHECK(contains(error_of("seed 1\n"), "expected '='"));
  CHECK(contains(error_of("threads = -1\n"), "must be >= 0"));
  CHECK_THROWS_AS(parse_config_file("/nonexistent/x.toml"), Error);
}

TEST_CASE("round trip through text") {
  ExperimentConfig cfg;
  cfg.seed = 7;
  cfg.output_dir = "out \"quoted\"";
  cfg.threads = 3;
  cfg.quadrature.scheme = QuadratureScheme::kLaguerre;
  cfg.quadrature.abs_tol = 3e-11;
  cfg.predict.funcs = {"custom:knots=0/0,1/0.5,4/1", "star_reg:kappa=0.1"};
  cfg.predict.delta_grid = {2.1, 1.0 / 3.0 + 2.0, 6.0};
  cfg.sweep.tol = 1e-7;
  cfg.sweep.ensembles = {"haar", "cdp"};
  cfg.pcaep.mu = 0.123456789012345;
  cfg.pcaep.n = 1024;
  cfg.spectrum.branch = "min";
  cfg.spectrum.with_e = false;
  const std::string text = to_config_text(cfg);
  const ExperimentConfig back = config_from_document(parse_config_text(text));
  CHECK(back == cfg);
  CHECK(to_config_text(back) == text);

  // Absent mu stays absent.
  cfg.pcaep.mu.reset();
  CHECK(config_from_document(parse_config_text(to_config_text(cfg))) == cfg);
}

TEST_CASE("function strings") {
  const ProcessingSpec t = parse_func("trim:c2=2");
  CHECK(t.kind == ProcessingKind::kTrim);
  CHECK(t.c2 == 2.0);
  CHECK(parse_func("subset:c1=1.5").c1 == 1.5);
  CHECK(parse_func("star_reg:kappa=0.01").kappa == 0.01);
  CHECK(parse_func("mm").kind == ProcessingKind::kMM);
  const ProcessingSpec c = parse_func("custom:knots=0/0,1/0.5,4/1");
  REQUIRE(c.table.size() == 3);
  CHECK(c.table[1] == std::pair{1.0, 0.5});
  for (const char* s : {"trim:c2=2.0", "subset:c1=1.5", "star_reg:kappa=0.01", "mm", "shifted_mm",
                        "custom:knots=0.0/0.0,1.0/0.5,4.0/1.0"}) {
    CHECK(format_func(parse_func(s)) == s);
  }
  CHECK_THROWS_AS(parse_func("trim:c1=2"), Error);
  CHECK_THROWS_AS(parse_func("trim:c2"), Error);
  CHECK_THROWS_AS(parse_func("custom"), Error);
  CHECK_THROWS_AS(parse_func("custom:knots=1-2"), Error);
  CHECK_THROWS_AS(parse_func("subset:c1=abc"), Error);
}
