// Acceptance run: one line per criterion, PASS / FAIL / SKIP. Checks that
// need the released annotation files or system outputs read them from
// $SIMPFACT_RELEASED_DIR and report SKIP when it is unset or incomplete.
// Exit status is nonzero iff any line is FAIL.

#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "oracles/edit_distance_oracle.hpp"
#include "oracles/sari_oracle.hpp"
#include "oracles/spearman_oracle.hpp"
#include "simpfact/classifier.hpp"
#include "simpfact/cli.hpp"
#include "simpfact/corpus.hpp"
#include "simpfact/edit_distance.hpp"
#include "simpfact/perturb.hpp"
#include "simpfact/sari.hpp"
#include "simpfact/service.hpp"
#include "simpfact/stats/agreement.hpp"
#include "simpfact/stats/correlation.hpp"
#include "simpfact/stats/report.hpp"
#include "support/insertion_fixture.hpp"
#include "support/service_drills.hpp"
#include "test_util.hpp"

namespace {

using namespace simpfact;
using json = nlohmann::json;
using testing::TempDir;
namespace fs = std::filesystem;

const fs::path kData = SIMPFACT_DATA_DIR;

/// Thrown by a check to report a failed expectation.
struct CheckFailed {
  std::string what;
};

/// Thrown by a check whose inputs are unavailable.
struct Skipped {
  std::string why;
};

void require(bool cond, const std::string& what) {
  if (!cond) throw CheckFailed{what};
}

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(6);
  o << v;
  return o.str();
}

int n_fail = 0;

void report(const std::string& id, const std::function<std::string()>& check) {
  std::string status = "PASS", detail;
  try {
    detail = check();
  } catch (const CheckFailed& f) {
    status = "FAIL";
    detail = f.what;
  } catch (const Skipped& s) {
    status = "SKIP";
    detail = s.why;
  } catch (const std::exception& e) {
    status = "FAIL";
    detail = std::string("unexpected exception: ") + e.what();
  }
  if (status == "FAIL") ++n_fail;
  std::cout << status << " " << id << (detail.empty() ? "" : ": " + detail) << std::endl;
}

/// Path of a released file, or Skipped naming what is missing.
fs::path released(const std::string& name) {
  const char* dir = std::getenv("SIMPFACT_RELEASED_DIR");
  if (!dir || !*dir) throw Skipped{"SIMPFACT_RELEASED_DIR not set"};
  const auto p = fs::path(dir) / name;
  if (!fs::exists(p)) throw Skipped{p.string() + " not found"};
  return p;
}

// ---------------------------------------------------------------------------

std::string aggregation_fidelity() {
  using S = Severity;
  require(stats::majority_label({S::minor, S::minor, S::major}) == S::minor, "{1,1,2} should give 1");
  require(!stats::majority_label({S::major, S::minor, S::none}).has_value(), "{2,1,0} should be undefined");

  const auto votes = corpus::load_votes(kData / "worked_example_votes.jsonl");
  const auto offline = stats::build_export(votes);

  // Same votes through the service: three qualified annotators on a pool
  // holding the worked-example pair ids.
  TempDir dir;
  std::map<std::string, std::map<std::string, corpus::AnnotationVote>> by_pair;
  for (const auto& v : votes) by_pair[v.pair_id][v.annotator_id] = v;
  std::vector<corpus::SentencePair> pool;
  for (const auto& [id, _] : by_pair) pool.push_back({id, "Complex " + id + ".", "Simple.", {}, {}, {}});
  const auto gold = service::GoldSet::load(kData / "gold_qualification.json");
  service::AnnotationService svc(dir / "svc", pool, gold, testing::fixed_clock());
  for (const auto& who : {"a1", "a2", "a3"}) {
    svc.register_and_qualify(who, testing::answers_with(gold, 30));
    while (auto task = svc.next_task(who)) {
      const auto& v = by_pair.at(task->id).at(who);
      std::array<json, 3> l;
      for (auto c : kAllCategories) l[static_cast<std::size_t>(c)] = to_int(v.labels[c]);
      svc.submit_vote(who, task->id, l);
    }
  }
  const auto exported = svc.export_results();
  require(exported.bundle.aggregated_jsonl() == offline.aggregated_jsonl(), "service export differs from offline");
  require(io::read_file(exported.dir / "aggregated.jsonl") == offline.aggregated_jsonl(), "exported file differs");

  const auto& w = exported.bundle.aggregated;
  require(w.size() == 3, "expected 3 aggregated pairs");
  require(w[0].outcomes[Category::insertion] == S::minor, "w1 insertion should be 1");
  require(!w[1].outcomes[Category::deletion].has_value(), "w2 deletion should be undefined");
  require(w[2].outcomes[Category::substitution] == S::none, "w3 substitution should be 0");
  return "majority_label and service export agree on {1,1,2}->1, {2,1,0}->undefined";
}

std::string edit_distance_oracle() {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<std::size_t> len(0, 8);
  std::uniform_int_distribution<int> ch(0, 3);
  auto gen = [&] {
    std::vector<int> v(len(rng));
    for (auto& x : v) x = ch(rng);
    return v;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = gen(), b = gen();
    require(metrics::levenshtein(a, b) == oracle::recursive_levenshtein(a, b), "oracle mismatch at trial " + std::to_string(trial));
  }
  for (int trial = 0; trial < 3000; ++trial) {
    const auto a = gen(), b = gen(), c = gen();
    const auto ab = metrics::levenshtein(a, b);
    require(ab == metrics::levenshtein(b, a), "asymmetric at trial " + std::to_string(trial));
    require(ab <= metrics::levenshtein(a, c) + metrics::levenshtein(c, b), "triangle violated at trial " + std::to_string(trial));
    require((ab == 0) == (a == b), "identity of indiscernibles violated");
  }
  return "1000 oracle pairs, 3000 symmetry/triangle triples";
}

std::string spearman_oracle() {
  std::mt19937 rng(17);
  std::uniform_int_distribution<std::size_t> len(3, 10);
  std::uniform_int_distribution<int> v(0, 4);
  auto tied = [&](std::size_t n) {
    std::vector<double> out(n);
    for (auto& x : out) x = v(rng);
    return out;
  };
  double worst = 0;
  int compared = 0;
  while (compared < 500) {
    const auto n = len(rng);
    const auto xs = tied(n), ys = tied(n);
    double got;
    try {
      got = stats::spearman(xs, ys);
    } catch (const DegenerateInputError&) {
      continue;
    }
    worst = std::max(worst, std::abs(got - oracle::brute_force_spearman(xs, ys)));
    std::vector<double> fx(n);
    for (std::size_t i = 0; i < n; ++i) fx[i] = std::exp(xs[i] / 3) + xs[i] * xs[i] * xs[i];
    require(stats::spearman(fx, ys) == got, "not invariant under a strictly increasing transform");
    ++compared;
  }
  require(worst <= 1e-12, "max |delta| " + fmt(worst));
  return "500 tied vectors, max |delta| " + fmt(worst) + ", monotone invariance holds";
}

std::string krippendorff_local() {
  require(stats::krippendorff_alpha_ordinal({{0, 0, 0}, {1, 1, 1}, {3, 3, 3}, {2, 2}}) == 1.0, "perfect agreement is not 1.0");
  require(stats::krippendorff_alpha_ordinal({{2, 2}, {0, 0, 0}}) == 1.0, "perfect agreement is not 1.0");
  const double got = stats::krippendorff_alpha_ordinal({{0, 0}, {0, 1}, {1, 1}});
  require(std::abs(got - 4.0 / 9.0) <= 1e-9, "3-unit golden case gave " + fmt(got));
  return "perfect agreement 1.0; 3-unit golden case 4/9";
}

std::string krippendorff_released() {
  const auto path = released("dataset_votes.jsonl");
  const auto bundle = stats::build_export(corpus::load_votes(path));
  const auto alpha = bundle.agreement[Category::deletion].alpha.alpha;
  require(alpha.has_value(), "deletion alpha undefined");
  require(std::abs(*alpha - 0.639) <= 0.02, "deletion alpha " + fmt(*alpha) + " outside 0.639 +/- 0.02");
  return "deletion alpha " + fmt(*alpha);
}

std::string sari_oracle() {
  std::mt19937 rng(1234);
  const std::vector<std::string> vocab{"the", "cat", "dog", "sat", "on", "mat", "a", ",", "."};
  std::uniform_int_distribution<int> nrefs(1, 4);
  auto toks = [](const std::string& s) { return simpfact::token_strings(s); };
  for (int trial = 0; trial < 200; ++trial) {
    const auto src = testing::join(testing::random_tokens(rng, 12, vocab));
    const auto out = testing::join(testing::random_tokens(rng, 12, vocab));
    std::vector<std::string> refs;
    for (int r = nrefs(rng); r > 0; --r) refs.push_back(testing::join(testing::random_tokens(rng, 12, vocab)));
    std::vector<std::vector<std::string>> rt;
    for (const auto& r : refs) rt.push_back(toks(r));
    const double want = oracle::counting_sari(toks(src), toks(out), rt);
    require(metrics::sari(src, out, refs) == want, "mismatch at case " + std::to_string(trial));
  }
  return "200 constructed cases match exactly";
}

std::string sari_released() {
  const auto dir = released("sari_editnts_wikilarge");
  const auto sources = io::read_lines(dir / "source.txt");
  const auto outputs = io::read_lines(dir / "output.txt");
  std::vector<std::vector<std::string>> ref_sets;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().filename().string().rfind("reference", 0) == 0) ref_sets.push_back(io::read_lines(entry.path()));
  }
  if (ref_sets.empty()) throw Skipped{(dir / "reference*.txt").string() + " not found"};
  require(outputs.size() == sources.size(), "source and output line counts differ");
  std::vector<metrics::SariItem> items;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    metrics::SariItem it{sources[i], outputs[i], {}};
    for (const auto& r : ref_sets) {
      require(r.size() == sources.size(), "reference line count differs");
      it.references.push_back(r[i]);
    }
    items.push_back(std::move(it));
  }
  const double got = metrics::corpus_sari(items);
  require(std::abs(got - 40.4) <= 0.5, "corpus SARI " + fmt(got) + " outside 40.4 +/- 0.5");
  return "corpus SARI " + fmt(got);
}

/// Sum of each distribution.tsv row's four percentage columns.
std::vector<double> row_sums(const std::string& tsv) {
  std::vector<double> sums;
  for (const auto& line : io::split_lines(tsv)) {
    if (line.rfind("category", 0) == 0 || line.empty()) continue;
    std::istringstream in(line);
    std::string cell;
    std::getline(in, cell, '\t');
    double sum = 0;
    bool defined = true;
    for (int k = 0; k < 4; ++k) {
      std::getline(in, cell, '\t');
      if (cell == "NA") defined = false;
      else sum += std::stod(cell);
    }
    if (defined) sums.push_back(sum);
  }
  return sums;
}

std::string distribution_local() {
  std::vector<corpus::AnnotationVote> votes = corpus::load_votes(kData / "worked_example_votes.jsonl");
  std::mt19937 rng(8);
  for (int p = 0; p < 391; ++p) {
    for (int a = 0; a < 3; ++a) {
      corpus::AnnotationVote v;
      v.pair_id = "r" + std::to_string(p);
      v.annotator_id = "a" + std::to_string(a);
      for (auto c : kAllCategories) v.labels[c] = severity_from_int(static_cast<int>(rng() % 4) - 1);
      votes.push_back(v);
    }
  }
  std::size_t rows = 0;
  for (const auto& vs : {corpus::load_votes(kData / "worked_example_votes.jsonl"), votes}) {
    for (double s : row_sums(stats::build_export(vs).distribution_tsv())) {
      require(std::abs(s - 100.0) <= 0.1, "row sums to " + fmt(s));
      ++rows;
    }
  }
  return std::to_string(rows) + " category rows sum to 100 +/- 0.1";
}

std::string distribution_released() {
  const auto bundle = stats::build_export(corpus::load_votes(released("newsela_votes.jsonl")));
  const auto& d = bundle.distribution[Category::deletion];
  require(d.n_defined > 0, "no defined deletion labels");
  const auto row = stats::round_shares(d.counts, d.n_defined);
  const std::array<double, 4> want{15.8, 40.8, 42.9, 0.5};
  for (std::size_t i = 0; i < 4; ++i) {
    require(std::abs(row[i] - want[i]) <= 0.1 + 1e-9, "deletion row " + fmt(row[0]) + "/" + fmt(row[1]) + "/" +
                                                           fmt(row[2]) + "/" + fmt(row[3]));
  }
  return "deletion row " + fmt(row[0]) + "/" + fmt(row[1]) + "/" + fmt(row[2]) + "/" + fmt(row[3]);
}

std::string noise_filter() {
  // Token-set Jaccard with "." as a token; each pair sits exactly on or just
  // below its threshold.
  struct Case {
    std::string complex, simple;
    bool kept;
  };
  const std::vector<Case> cases{
      {"a b c d", "a b e", true},        // 2/5 = 0.4, one sentence
      {"a b c d e", "a b f", false},     // 2/6, one sentence
      {"a b c", "a. d.", true},          // 1/5 = 0.2, two sentences
      {"a b c e", "a. d.", false},       // 1/6, two sentences
      {"a b c d e", "a. d.", true},      // 2/6 clears the two-sentence bar
      {"a b c d e", "a d x", false},     // 2/6 fails the one-sentence bar
  };
  for (std::size_t i = 0; i < cases.size(); ++i) {
    corpus::SentencePair p;
    p.id = "n" + std::to_string(i);
    p.complex_text = cases[i].complex;
    p.simple_text = cases[i].simple;
    require(corpus::passes_noise_filter(p) == cases[i].kept,
            "case " + std::to_string(i) + " (jaccard " + fmt(corpus::token_set_jaccard(p.complex_text, p.simple_text)) + ")");
  }
  return "both sides of 0.4 and 0.2 behave as specified";
}

// Pair scorer returning a fixed score, for pinning the phrase bands.
class FixedScore final : public metrics::EmbeddingProvider {
 public:
  explicit FixedScore(double s) : s_(s) {}
  std::string name() const override { return "fixed"; }
  std::size_t dimension() const override { return 0; }
  bool vector_based() const override { return false; }
  double pair_score(std::string_view, std::string_view) const override { return s_; }

 private:
  double s_;
};

std::string perturbation_contracts() {
  // Band edges are inclusive; anything outside both bands is discarded.
  const std::string src = "The firm grew quickly, last year, in the north.";
  for (double s : {0.6, 0.7, 0.8, 0.2, 0.3, 0.4}) {
    const auto out = perturb::gen_phrase_insertion(src, FixedScore(s));
    require(!out.empty(), "score " + fmt(s) + " discarded");
    const auto want = s >= 0.6 ? Severity::minor : Severity::major;
    for (const auto& e : out) require(e.severity == want, "score " + fmt(s) + " got the wrong level");
  }
  for (double s : {0.0, 0.19, 0.41, 0.5, 0.59, 0.81, 1.0}) {
    require(perturb::gen_phrase_insertion(src, FixedScore(s)).empty(), "score " + fmt(s) + " kept");
  }

  // Whole-corpus run through the CLI, twice with different job counts.
  TempDir dir;
  const auto corpus = (kData / "corpus100.txt").string();
  for (const auto* jobs : {"1", "4"}) {
    const std::string out = (dir / (std::string("run") + jobs)).string();
    const char* argv[] = {"simpfact", "perturb", "--complex", corpus.c_str(), "--simple", corpus.c_str(),
                          "--seed", "7", "--jobs", jobs, "--out", out.c_str()};
    std::ostringstream o, e;
    require(cli::run(static_cast<int>(std::size(argv)), argv, o, e) == 0, "perturb failed: " + e.str());
  }
  for (const auto* f : {"manifest.json", "examples.jsonl", "dataset_insertion.jsonl", "dataset_substitution.jsonl"}) {
    require(io::read_file(dir / "run1" / f) == io::read_file(dir / "run4" / f), std::string(f) + " differs between reruns");
  }

  metrics::TokenF1Provider f1;
  perturb::HashMaskedLM lm;
  std::size_t n = 0;
  std::map<std::string, std::size_t> per_generator;
  for (const auto& line : io::split_lines(io::read_file(dir / "run1" / "examples.jsonl"))) {
    const auto e = perturb::perturbed_from_json(json::parse(line));
    const std::string where = std::string(to_string(e.generator)) + " example " + std::to_string(n);
    ++n;
    ++per_generator[std::string(to_string(e.generator))];
    require(e.category == perturb::category_of(e.generator), where + ": wrong category");
    require(e.source_text != e.target_text, where + ": no change");
    switch (e.generator) {
      case perturb::Generator::name_insertion:
      case perturb::Generator::statement_negation:
        require(e.severity == Severity::minor, where + ": must be level 1");
        break;
      case perturb::Generator::number_alteration: {
        require(e.severity == Severity::minor, where + ": must be level 1");
        const auto a = e.params["original"].get<std::string>(), b = e.params["replacement"].get<std::string>();
        require(a != b && a.size() == b.size(), where + ": replacement must differ with the same shape");
        break;
      }
      case perturb::Generator::phrase_insertion: {
        const double s = metrics::embed_similarity(e.source_text, e.target_text, f1).score;
        require(s == e.params["score"].get<double>(), where + ": recorded score does not reproduce");
        const bool l1 = s >= 0.6 && s <= 0.8, l2 = s >= 0.2 && s <= 0.4;
        require((l1 && e.severity == Severity::minor) || (l2 && e.severity == Severity::major),
                where + ": score " + fmt(s) + " does not match its level");
        break;
      }
      case perturb::Generator::mask_fill: {
        const auto positions = e.params["positions"].get<std::vector<std::size_t>>();
        if (e.severity == Severity::minor) {
          require(positions.size() == 2 && e.params["rank"] == 3, where + ": level 1 masks 2 tokens at rank 3");
        } else {
          require(e.severity == Severity::major && e.params["rank"] == 5 && !positions.empty(),
                  where + ": level 2 masks every fifth token at rank 5");
        }
        const auto again = perturb::gen_mask_fill(e.source_text, lm,
                                                  e.severity == Severity::minor ? perturb::MaskMode::level1 : perturb::MaskMode::level2,
                                                  7, e.pair_id);
        require(again && again->target_text == e.target_text, where + ": not reproducible from its seed");
        break;
      }
    }
  }
  require(per_generator.size() == perturb::kAllGenerators.size(), "some generator produced nothing");

  const auto m = json::parse(io::read_file(dir / "run1" / "manifest.json"));
  for (const auto* cat : {"insertion", "substitution"}) {
    const auto& d = m["datasets"][cat];
    require(d.contains("counts") && d.contains("total") && d.contains("generators") && d["seed"] == 7,
            std::string(cat) + " manifest lacks counts/total/generators/seed");
    std::size_t sum = 0;
    for (const auto& [_, v] : d["counts"].items()) sum += v.get<std::size_t>();
    require(sum == d["total"].get<std::size_t>(), std::string(cat) + " counts do not sum to total");
  }
  return std::to_string(n) + " examples meet their contracts; bands exact; reruns byte-identical";
}

std::vector<classifier::Example> blobs(std::uint64_t seed, std::size_t per_class, std::size_t dim = 4) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0, 0.5);
  std::vector<classifier::Example> out;
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      classifier::Example e{std::vector<double>(dim), c};
      for (std::size_t j = 0; j < dim; ++j) e.x[j] = n(rng) + (j == static_cast<std::size_t>(c) ? 5.0 : 0.0);
      out.push_back(e);
    }
  }
  return out;
}

std::string classifier_numerics() {
  using namespace classifier;
  // Gradient check.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0, 1);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dim = 1 + static_cast<std::size_t>(trial % 8);
    std::vector<std::vector<double>> z(12, std::vector<double>(dim));
    std::vector<int> y(12);
    for (std::size_t i = 0; i < z.size(); ++i) {
      for (auto& v : z[i]) v = g(rng);
      y[i] = static_cast<int>(i % 3);
    }
    auto p = Parameters::zeros(dim);
    for (auto& w : p.weights) w = g(rng);
    for (auto& b : p.bias) b = g(rng);
    Parameters grad;
    cross_entropy(p, z, y, &grad);
    auto check = [&](double analytic, double* slot) {
      const double h = 1e-5, orig = *slot;
      *slot = orig + h;
      const double up = cross_entropy(p, z, y);
      *slot = orig - h;
      const double down = cross_entropy(p, z, y);
      *slot = orig;
      const double numeric = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8}));
    };
    for (std::size_t k = 0; k < p.weights.size(); ++k) check(grad.weights[k], &p.weights[k]);
    for (std::size_t c = 0; c < kClasses; ++c) check(grad.bias[c], &p.bias[c]);
  }
  require(worst <= 1e-5, "gradient relative error " + fmt(worst));

  // Oversampling.
  std::vector<int> labels;
  for (int c : {0, 1, 2}) labels.insert(labels.end(), std::array{90, 12, 7}[static_cast<std::size_t>(c)], c);
  std::vector<std::size_t> all(labels.size());
  std::iota(all.begin(), all.end(), 0);
  std::array<std::size_t, 3> counts{};
  for (auto i : oversample(all, labels)) ++counts[static_cast<std::size_t>(labels[i])];
  require(counts[0] == counts[1] && counts[1] == counts[2], "oversampling left unequal class counts");

  // Separable data.
  const auto r = train(Category::deletion, blobs(1, 100), {.epochs = 100, .seed = 3});
  const double f1 = evaluate(r.model, blobs(2, 100)).macro_f1();
  require(f1 >= 0.95, "held-out macro-F1 " + fmt(f1));

  // Checkpoint selection against the log.
  auto rows = blobs(9, 30);
  for (auto& e : rows) {
    if (e.label == 2) e.x[1] += 4.0;
  }
  const auto cr = train(Category::insertion, rows, {.step_size = 0.05, .epochs = 40, .seed = 2});
  std::size_t best_epoch = 0;
  double best = -1;
  for (const auto& e : cr.log) {
    if (e.score > best) {
      best = e.score;
      best_epoch = e.epoch;
    }
  }
  require(cr.best_epoch == best_epoch, "checkpoint is not the logged maximum");
  std::vector<Example> holdout;
  for (auto i : cr.split.holdout) holdout.push_back(rows[i]);
  require(evaluate(cr.model, holdout).level12_f1() == best, "checkpoint does not reproduce its logged score");

  // Synthetic pretraining on scarce insertion data.
  const auto fx = testing::make_insertion_fixture();
  const TrainOptions opts{.epochs = 200, .seed = 1};
  const double without = evaluate(train(Category::insertion, fx.real_train, opts).model, fx.real_test).level12_f1();
  const double with = evaluate(pretrain_then_finetune(Category::insertion, fx.synthetic, fx.real_train, opts, opts).finetune.model,
                               fx.real_test)
                          .level12_f1();
  require(with > without, "pretraining level-1/2 F1 " + fmt(with) + " not above " + fmt(without));
  return "grad rel err " + fmt(worst) + "; macro-F1 " + fmt(f1) + "; level-1/2 F1 " + fmt(without) + " -> " + fmt(with) +
         " with pretraining";
}

std::string service_durability() {
  const auto gold = service::GoldSet::load(kData / "gold_qualification.json");
  const auto crash = testing::crash_replay_drill(gold, 100);
  require(crash.ok(), crash.failures.empty() ? "" : crash.failures.front());
  require(crash.n_checks == 100, "only " + std::to_string(crash.n_checks) + " kill points checked");
  const auto conc = testing::concurrency_drill(gold, 16, 40);
  require(conc.ok(), conc.failures.empty() ? "" : conc.failures.front());
  return "100 kill points over " + std::to_string(crash.n_events) + " events replay exactly; 16 annotators, " +
         std::to_string(conc.n_checks) + " pairs, none above 3 votes";
}

}  // namespace

int main() {
  report("aggregation-fidelity", aggregation_fidelity);
  report("edit-distance-oracle", edit_distance_oracle);
  report("spearman-oracle", spearman_oracle);
  report("krippendorff-alpha", krippendorff_local);
  report("krippendorff-alpha-released", krippendorff_released);
  report("sari-oracle", sari_oracle);
  report("sari-released", sari_released);
  report("distribution-reports", distribution_local);
  report("distribution-reports-released", distribution_released);
  report("noise-filter", noise_filter);
  report("perturbation-contracts", perturbation_contracts);
  report("classifier-numerics", classifier_numerics);
  report("service-durability", service_durability);
  std::cout << (n_fail ? "acceptance: " + std::to_string(n_fail) + " failed" : std::string("acceptance: ok")) << std::endl;
  return n_fail ? 1 : 0;
}
