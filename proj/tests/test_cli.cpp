#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "simpfact/cli.hpp"
#include "test_util.hpp"

namespace {

using namespace simpfact;
using json = nlohmann::json;
using simpfact::testing::TempDir;

const std::filesystem::path kData = SIMPFACT_DATA_DIR;

struct RunResult {
  int code;
  std::string out, err;
};

RunResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "simpfact");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

/// Runs the installed binary through the shell; returns its exit status.
int run_binary(const std::string& args) {
  const std::string cmd = std::string(SIMPFACT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> parse_tsv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& line : io::split_lines(text)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == '\t') {
        cells.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    rows.push_back(cells);
  }
  return rows;
}

/// TSV cell and JSON value denote the same datum.
bool same_value(const std::string& cell, const json& v) {
  if (v.is_null()) return cell == "NA";
  if (v.is_boolean()) return cell == (v.get<bool>() ? "true" : "false");
  if (v.is_string()) return cell == v.get<std::string>();
  if (v.is_number()) return std::stod(cell) == v.get<double>();
  return false;
}

/// Every JSON row's fields equal the TSV row with the same position.
void expect_equivalent(const std::string& tsv, const json& rows) {
  const auto table = parse_tsv(tsv);
  ASSERT_EQ(table.size(), rows.size() + 1);
  const auto& header = table[0];
  for (std::size_t r = 0; r < rows.size(); ++r) {
    ASSERT_EQ(table[r + 1].size(), header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
      EXPECT_TRUE(same_value(table[r + 1][c], rows[r].at(header[c])))
          << header[c] << " row " << r << ": " << table[r + 1][c] << " vs " << rows[r].at(header[c]).dump();
    }
  }
}

TEST(Cli, AgreeWorkedExample) {
  const auto r = run({"agree", "--votes", (kData / "worked_example_votes.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc["aggregated"][0]["insertion"], 1);
  EXPECT_TRUE(doc["aggregated"][1]["deletion"].is_null());
  EXPECT_EQ(doc["aggregated"][2]["substitution"], 0);
  EXPECT_EQ(doc["report"]["distribution"]["deletion"]["n_undefined"], 1);
  EXPECT_EQ(doc["manifest"]["command"], "agree");
  EXPECT_TRUE(doc["manifest"]["seed"].is_null());
}

TEST(Cli, AgreeOutputMatchesServiceExport) {
  TempDir dir;
  service::ServiceOptions so;
  so.clock = [] { return std::int64_t{0}; };
  std::vector<corpus::SentencePair> pool;
  for (int i = 0; i < 4; ++i) pool.push_back({"q" + std::to_string(i), "A complex text.", "A text.", {}, {}, {}});
  service::AnnotationService svc(dir / "svc", pool, service::GoldSet::load(kData / "gold_qualification.json"), so);
  std::vector<service::QualificationAnswer> perfect;
  for (const auto& g : svc.gold().items) perfect.push_back({g.pair.id, g.labels});
  for (auto id : {"x", "y", "z"}) svc.register_and_qualify(id, perfect);
  int k = 0;
  for (int round = 0; round < 4; ++round) {
    for (auto id : {"x", "y", "z"}) {
      if (auto t = svc.next_task(id)) {
        const int l = (k++ * 7) % 4 - 1;
        svc.submit_vote(id, t->id, {json(l), json((l + 2) % 3), json(0)});
      }
    }
  }
  const auto exported = svc.export_results();
  const auto r = run({"agree", "--votes", (exported.dir / "votes.jsonl").string(), "--out", (dir / "offline").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (auto f : {"aggregated.jsonl", "report.json", "agreement.tsv", "distribution.tsv"}) {
    EXPECT_EQ(io::read_file(dir / "offline" / f), io::read_file(exported.dir / f)) << f;
  }
}

TEST(Cli, AgreeTsvMatchesJson) {
  const auto votes = (kData / "worked_example_votes.jsonl").string();
  const auto j = json::parse(run({"agree", "--votes", votes}).out);
  const auto t = run({"agree", "--votes", votes, "--format", "tsv"});
  ASSERT_EQ(t.code, 0);
  const auto table = parse_tsv(t.out);
  // agreement rows 1..3, then distribution header and rows
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& row = table[1 + i];
    const auto& a = j["report"]["agreement"][row[0]];
    EXPECT_TRUE(same_value(row[1], a["pct_majority"]));
    EXPECT_TRUE(same_value(row[2], a["pct_majority_nonzero"]));
    EXPECT_TRUE(same_value(row[3], a["kripp_alpha"]));
    const auto& d = table[5 + i];
    const auto& dist = j["report"]["distribution"][d[0]];
    for (std::size_t k = 0; k < 4; ++k) EXPECT_TRUE(same_value(d[1 + k], dist["percent"][stats::kLevelNames[k]]));
  }
}

TEST(Cli, CorrelateStrictlyDecreasingMetricGivesMinusOne) {
  TempDir dir;
  std::string metrics, agg;
  const double jac[] = {0.9, 0.7, 0.4, 0.1};
  const int label[] = {0, 1, 2, -1};
  for (int i = 0; i < 4; ++i) {
    const std::string id = "c" + std::to_string(i);
    metrics += json{{"pair_id", id}, {"norm_edit_distance", 0.5}, {"length_change_pct", -10.0 * i},
                    {"jaccard", jac[i]}, {"sari", nullptr}, {"embed_similarity", nullptr}}.dump() + "\n";
    agg += json{{"pair_id", id}, {"insertion", label[i]}, {"deletion", 0}, {"substitution", label[i]}}.dump() + "\n";
  }
  const auto mp = dir.write("metrics.jsonl", metrics);
  const auto ap = dir.write("agg.jsonl", agg);
  const auto r = run({"correlate", "--metrics", mp.string(), "--aggregated", ap.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cells = json::parse(r.out)["correlations"];
  auto find = [&](const std::string& m, const std::string& c) {
    for (const auto& cell : cells) {
      if (cell["metric"] == m && cell["category"] == c) return cell;
    }
    return json();
  };
  EXPECT_EQ(find("jaccard", "insertion")["rho"], -1.0);
  EXPECT_EQ(find("length_change_pct", "substitution")["rho"], -1.0);
  EXPECT_TRUE(find("jaccard", "deletion")["rho"].is_null());
  EXPECT_EQ(find("jaccard", "deletion")["note"], "constant");
  EXPECT_EQ(find("sari", "insertion")["n"], 0);

  const auto ex = run({"correlate", "--metrics", mp.string(), "--aggregated", ap.string(), "--exclude-gibberish"});
  const auto ex_cells = json::parse(ex.out)["correlations"];
  EXPECT_EQ(ex_cells[6]["n"], 3);  // jaccard/insertion without the -1 pair

  const auto t = run({"correlate", "--metrics", mp.string(), "--aggregated", ap.string(), "--format", "tsv"});
  expect_equivalent(t.out, cells);
}

TEST(Cli, PerturbIsDeterministicAcrossRunsAndJobs) {
  TempDir dir;
  const auto corpus = (kData / "corpus100.txt").string();
  const std::vector<std::string> base{"perturb", "--complex", corpus, "--simple", corpus, "--seed", "7"};
  auto with = [&](std::vector<std::string> extra) {
    auto a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };
  ASSERT_EQ(run(with({"--out", (dir / "a").string()})).code, 0);
  ASSERT_EQ(run(with({"--out", (dir / "b").string(), "--jobs", "8"})).code, 0);
  for (auto f : {"manifest.json", "examples.jsonl", "dataset_insertion.jsonl", "dataset_substitution.jsonl"}) {
    EXPECT_EQ(io::read_file(dir / "a" / f), io::read_file(dir / "b" / f)) << f;
  }
  const auto m = json::parse(io::read_file(dir / "a" / "manifest.json"));
  EXPECT_EQ(m["seed"], 7);
  EXPECT_EQ(m["datasets"]["insertion"]["seed"], 7);
  for (const auto& [name, digest] : m["artifacts"].items()) {
    EXPECT_EQ(digest, io::fnv1a_hex(io::read_file(dir / "a" / name))) << name;
  }
  ASSERT_EQ(run({"perturb", "--complex", corpus, "--simple", corpus, "--seed", "8", "--out", (dir / "c").string()}).code, 0);
  EXPECT_NE(io::read_file(dir / "a" / "examples.jsonl"), io::read_file(dir / "c" / "examples.jsonl"));
}

TEST(Cli, SeedIsRequiredForGeneratingCommands) {
  TempDir dir;
  const auto corpus = (kData / "corpus100.txt").string();
  auto r = run({"perturb", "--complex", corpus, "--simple", corpus, "--out", dir.path().string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--seed"), std::string::npos);
  r = run({"train", "--category", "insertion", "--data", "x.jsonl", "--out", dir.path().string()});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  const auto votes = (kData / "worked_example_votes.jsonl").string();
  EXPECT_EQ(run_binary("agree --votes " + votes), 0);
  EXPECT_EQ(run_binary("agree --votes " + votes + " --frobnicate"), 1);
  EXPECT_EQ(run_binary("agree"), 1);
  EXPECT_EQ(run_binary("explode"), 1);
  EXPECT_EQ(run_binary("agree --votes " + (dir / "missing.jsonl").string()), 2);
  const auto bad = dir.write("bad.jsonl", io::read_file(votes) + "{\"pair_id\": \"w9\", \"annotator_id\": \"a1\", \"insertion\": 7}\n");
  EXPECT_EQ(run_binary("agree --votes " + bad.string()), 1);
  EXPECT_EQ(run_binary("--help"), 0);
}

TEST(Cli, MalformedRecordMessageNamesFileAndLine) {
  TempDir dir;
  const auto bad = dir.write("bad.jsonl", "{\"id\":\"a\",\"complex_text\":\"x y\",\"simple_text\":\"x\"}\n{broken\n");
  const auto r = run({"filter", "--pairs", bad.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(bad.string() + ":2"), std::string::npos) << r.err;
}

TEST(Cli, FilterThresholds) {
  TempDir dir;
  // Punctuation is a token. Single sentence: 2/5 = 0.4 is kept, 1/4 dropped.
  // Two sentences: 2/6 kept at the lower bar, 1/10 dropped.
  std::string pairs;
  pairs += json{{"id", "at"}, {"complex_text", "a b c d"}, {"simple_text", "a b e"}}.dump() + "\n";
  pairs += json{{"id", "below"}, {"complex_text", "a b c"}, {"simple_text", "a d"}}.dump() + "\n";
  pairs += json{{"id", "multi"}, {"complex_text", "a b c"}, {"simple_text", "a b d. e."}}.dump() + "\n";
  pairs += json{{"id", "multi_below"}, {"complex_text", "a b c d e"}, {"simple_text", "a f. g h i."}}.dump() + "\n";
  const auto p = dir.write("pairs.jsonl", pairs);
  const auto r = run({"filter", "--pairs", p.string(), "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto kept = corpus::load_pairs(dir / "out" / "kept.jsonl");
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].id, "at");
  EXPECT_EQ(kept[1].id, "multi");
  const auto m = json::parse(io::read_file(dir / "out" / "manifest.json"));
  EXPECT_EQ(m["summary"]["n_dropped"], 2);

  const auto j = json::parse(run({"filter", "--pairs", p.string()}).out);
  expect_equivalent(run({"filter", "--pairs", p.string(), "--format", "tsv"}).out, j["decisions"]);
}

TEST(Cli, AnalyzeWithReferencesAndStratification) {
  TempDir dir;
  const auto complex = dir.write("c.txt", "The old bridge was closed in 1987 .\nThe cat sat on the mat .\nA big red dog ran .\n");
  const auto simple = dir.write("s.txt", "The bridge was closed .\nThe cat sat .\nA dog ran fast .\n");
  const auto ref = dir.write("r.txt", "The old bridge closed .\nThe cat sat on a mat .\nA red dog ran .\n");
  std::string agg;
  for (int i = 1; i <= 3; ++i) {
    agg += json{{"pair_id", "sys:" + std::to_string(i)}, {"insertion", i == 3 ? 1 : 0}, {"deletion", i - 1},
                {"substitution", nullptr}}.dump() + "\n";
  }
  const auto ap = dir.write("agg.jsonl", agg);
  const std::vector<std::string> args{"analyze", "--complex", complex.string(), "--simple", simple.string(),
                                      "--origin", "sys", "--reference", ref.string(), "--aggregated", ap.string(),
                                      "--similarity", "hash"};
  const auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = json::parse(r.out);
  ASSERT_EQ(doc["metrics"].size(), 3u);
  EXPECT_EQ(doc["metrics"][1]["pair_id"], "sys:2");
  EXPECT_DOUBLE_EQ(doc["metrics"][1]["sari"].get<double>(),
                   metrics::sari("The cat sat on the mat .", "The cat sat .", {"The cat sat on a mat ."}));
  EXPECT_EQ(doc["metrics"][0]["embed_provider"], "hash-stub");
  EXPECT_TRUE(doc["summary"].contains("corpus_sari"));
  for (const auto& row : doc["stratified"]) {
    if (row["metric"] == "jaccard" && row["category"] == "insertion" && row["level"] == "0") {
      EXPECT_EQ(row["n"], 2);
    }
    if (row["category"] == "substitution") {
      EXPECT_EQ(row["n"], 0);
    }
  }

  auto tsv_args = args;
  tsv_args.insert(tsv_args.end(), {"--format", "tsv"});
  const auto t = run(tsv_args);
  const auto blank = t.out.find("\n\n");
  ASSERT_NE(blank, std::string::npos);
  expect_equivalent(t.out.substr(0, blank + 1), doc["metrics"]);
  expect_equivalent(t.out.substr(blank + 2), doc["stratified"]);

  auto parallel = args;
  parallel.insert(parallel.end(), {"--jobs", "3"});
  EXPECT_EQ(json::parse(run(parallel).out), doc);

  const auto short_ref = dir.write("short.txt", "one line\n");
  auto misaligned = args;
  misaligned[8] = short_ref.string();
  EXPECT_EQ(run(misaligned).code, 1);
}

TEST(Cli, ConfigDigestIgnoresInputPath) {
  TempDir dir;
  const auto votes = io::read_file(kData / "worked_example_votes.jsonl");
  const auto a = dir.write("a.jsonl", votes);
  const auto b = dir.write("sub/b.jsonl", votes);
  const auto ja = json::parse(run({"agree", "--votes", a.string()}).out);
  const auto jb = json::parse(run({"agree", "--votes", b.string()}).out);
  EXPECT_EQ(ja, jb);
  const auto t = run({"agree", "--votes", a.string(), "--format", "tsv"});
  EXPECT_EQ(t.out.rfind("# simpfact agree config_digest=" + ja["manifest"]["config_digest"].get<std::string>(), 0), 0u);
}

TEST(Cli, TrainAndEvaluate) {
  TempDir dir;
  const auto corpus = (kData / "corpus100.txt").string();
  ASSERT_EQ(run({"perturb", "--complex", corpus, "--simple", corpus, "--seed", "3", "--generators",
                 "name_insertion,phrase_insertion", "--out", (dir / "syn").string()})
                .code,
            0);
  const auto data = (dir / "syn" / "dataset_insertion.jsonl").string();
  const std::vector<std::string> train{"train", "--category", "insertion", "--data", data, "--seed", "5",
                                       "--epochs", "40", "--similarity", "token-f1"};
  auto t1 = train, t2 = train;
  t1.insert(t1.end(), {"--out", (dir / "m1").string()});
  t2.insert(t2.end(), {"--out", (dir / "m2").string(), "--jobs", "4"});
  const auto r1 = run(t1);
  ASSERT_EQ(r1.code, 0) << r1.err;
  ASSERT_EQ(run(t2).code, 0);
  for (auto f : {"model.json", "train_log.jsonl", "manifest.json"}) {
    EXPECT_EQ(io::read_file(dir / "m1" / f), io::read_file(dir / "m2" / f)) << f;
  }
  const auto model = classifier::classifier_from_json(json::parse(io::read_file(dir / "m1" / "model.json")));
  EXPECT_EQ(model.manifest["seed"], 5);
  EXPECT_EQ(model.manifest["similarity"]["kind"], "token-f1");
  EXPECT_EQ(io::split_lines(io::read_file(dir / "m1" / "train_log.jsonl")).size(), 40u);

  const auto model_path = (dir / "m1" / "model.json").string();
  const auto ev = run({"evaluate", "--model", model_path, "--data", data});
  ASSERT_EQ(ev.code, 0) << ev.err;
  const auto rep = json::parse(ev.out);
  EXPECT_EQ(rep["n_evaluated"], 196);
  EXPECT_GT(rep["macro_f1"].get<double>(), 0.5);
  EXPECT_EQ(rep["manifest"]["config"]["similarity"], "token-f1");

  const auto tsv = run({"evaluate", "--model", model_path, "--data", data, "--format", "tsv"});
  json rows = json::array();
  for (int c = 0; c < 3; ++c) {
    auto row = rep["classes"][std::to_string(c)];
    row["class"] = c;
    rows.push_back(row);
  }
  expect_equivalent(tsv.out, rows);

  // Deletion cannot be pretrained on synthetic data.
  auto del = train;
  del[2] = "deletion";
  del.insert(del.end(), {"--synthetic", data, "--out", (dir / "d").string()});
  EXPECT_EQ(run(del).code, 1);

  // Two-stage run records the pretraining manifest.
  auto staged = train;
  staged.insert(staged.end(), {"--synthetic", data, "--pretrain-epochs", "10", "--out", (dir / "s").string()});
  ASSERT_EQ(run(staged).code, 0);
  const auto sm = json::parse(io::read_file(dir / "s" / "model.json"));
  EXPECT_EQ(sm["manifest"]["pretrain"]["epochs"], 10);
  EXPECT_NE(io::read_file(dir / "s" / "train_log.jsonl").find("\"stage\":\"finetune\""), std::string::npos);
}

TEST(Cli, EvaluateFromPairsAndVotes) {
  TempDir dir;
  std::string pairs;
  for (auto id : {"w1", "w2", "w3"}) {
    pairs += json{{"id", id}, {"complex_text", "The mayor opened the new park in 2001."},
                  {"simple_text", "The mayor opened the park."}}.dump() + "\n";
  }
  const auto p = dir.write("pairs.jsonl", pairs);
  const auto corpus = (kData / "corpus100.txt").string();
  ASSERT_EQ(run({"perturb", "--complex", corpus, "--simple", corpus, "--seed", "1", "--generators", "name_insertion,phrase_insertion",
                 "--out", (dir / "syn").string()})
                .code,
            0);
  ASSERT_EQ(run({"train", "--category", "insertion", "--data", (dir / "syn" / "dataset_insertion.jsonl").string(),
                 "--seed", "1", "--epochs", "5", "--out", (dir / "m").string()})
                .code,
            0);
  const auto r = run({"evaluate", "--model", (dir / "m" / "model.json").string(), "--pairs", p.string(), "--votes",
                      (kData / "worked_example_votes.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = json::parse(r.out);
  EXPECT_EQ(rep["n_evaluated"], 2);
  EXPECT_EQ(rep["n_excluded"], 1);
}

}  // namespace
