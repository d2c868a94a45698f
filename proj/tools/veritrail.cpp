#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "veritrail/veritrail.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw veritrail::Error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw veritrail::Error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw veritrail::Error("short write to '" + path + "'");
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path == "-")
    std::cout << content;
  else
    write_file(out_path, content);
}

std::string graph_error_kind(veritrail::GraphError::Kind k) {
  using K = veritrail::GraphError::Kind;
  switch (k) {
    case K::CycleDetected: return "CycleDetected";
    case K::TerminalHasOutgoingEdge: return "TerminalHasOutgoingEdge";
    case K::DanglingEdgeEndpoint: return "DanglingEdgeEndpoint";
    case K::StageViolation: return "StageViolation";
    case K::EmptyRootSet: return "EmptyRootSet";
    case K::DuplicateNodeId: return "DuplicateNodeId";
    case K::UnknownNode: return "UnknownNode";
    case K::InvalidNodeId: return "InvalidNodeId";
    case K::ExplicitMapIncomplete: return "ExplicitMapIncomplete";
    case K::ExplicitMapViolatesMonotonicity: return "ExplicitMapViolatesMonotonicity";
    case K::BadFormat: return "BadFormat";
  }
  return "Unknown";
}

int cmd_validate(const std::string& graph_file) {
  ordered_json report;
  try {
    veritrail::ProcessGraph g = veritrail::graph_from_json(json::parse(read_file(graph_file)));
    report["ok"] = true;
    report["terminal"] = g.terminal();
    report["nodes"] = g.size();
    report["warnings"] = g.warnings();
    std::cout << report.dump(2) << "\n";
    return 0;
  } catch (const veritrail::GraphError& e) {
    report["ok"] = false;
    report["violations"] = ordered_json::array(
        {{{"kind", graph_error_kind(e.kind)}, {"message", e.what()}}});
  } catch (const json::exception& e) {
    report["ok"] = false;
    report["violations"] =
        ordered_json::array({{{"kind", "BadFormat"}, {"message", e.what()}}});
  }
  std::cout << report.dump(2) << "\n";
  return 1;
}

struct VerifyArgs {
  std::string graph_file;
  std::string claims_file;
  std::string out = "-";
  int q = 1;
  int evidence_limit = 40;
  int verdict_limit = 200;
  int verdict_limit_root = -1;
  int max_reruns = 1;
  int max_decomp = 20;
  int samples = 0;
  int threshold_t = 2;
  std::string strategy = "lm";
  int top_k = 5;
  std::string backend = "scripted";
  std::string transcript;
  std::string endpoint;
  std::string model;
  long seed = 0;
  int jobs = 1;
  std::string usage_report;
  double prompt_price = 0.0;
  double completion_price = 0.0;
};

int cmd_verify(VerifyArgs args) {
  veritrail::ProcessGraph graph =
      veritrail::graph_from_json(json::parse(read_file(args.graph_file)));
  std::vector<veritrail::Claim> claims = veritrail::claims_from_jsonl(read_file(args.claims_file));

  veritrail::VerifierConfig config;
  config.q = args.q;
  config.evidence_limit = args.evidence_limit;
  config.verdict_limit_nonroot = args.verdict_limit;
  if (args.verdict_limit_root >= 0) config.verdict_limit_root = args.verdict_limit_root;
  config.max_verdict_reruns = args.max_reruns;
  config.max_decomposition = args.max_decomp;
  config.strategy = args.strategy == "vtrag" ? veritrail::EvidenceStrategy::EmbeddingTopK
                                             : veritrail::EvidenceStrategy::LmEvidence;
  config.top_k = args.top_k;
  if (args.samples > 0) config.consensus = veritrail::ConsensusConfig{args.samples, args.threshold_t};
  config.request_seed = args.seed;

  std::unique_ptr<veritrail::LmBackend> backend;
  if (args.backend == "scripted") {
    backend = std::make_unique<veritrail::SubstringOracleBackend>();
  } else if (args.backend == "replay") {
    if (args.transcript.empty())
      throw veritrail::VerifierError(veritrail::VerifierError::Kind::InvalidConfig,
                                     "the replay backend needs --transcript");
    json j = json::parse(read_file(args.transcript));
    if (!j.is_array())
      throw veritrail::VerifierError(veritrail::VerifierError::Kind::InvalidConfig,
                                     "replay transcript must be a json array of strings");
    backend = std::make_unique<veritrail::ReplayBackend>(j.get<std::vector<std::string>>());
    args.jobs = 1;  // replay order is part of the fixture
  } else {
    if (args.model.empty())
      throw veritrail::VerifierError(veritrail::VerifierError::Kind::InvalidConfig,
                                     "the http backend needs --model");
    backend = veritrail::HttpBackend::from_env(args.model, args.endpoint);
  }

  veritrail::HashEmbedder embedder;
  veritrail::Embedder* embedder_ptr =
      config.strategy == veritrail::EvidenceStrategy::EmbeddingTopK ? &embedder : nullptr;
  veritrail::UsageLedger ledger(veritrail::PriceTable{args.prompt_price, args.completion_price});

  std::vector<veritrail::ClaimResult> results(claims.size());
  std::atomic<size_t> cursor{0};
  std::mutex err_mu;
  std::exception_ptr first_error;

  auto store_error = [&](std::exception_ptr ep) {
    std::lock_guard<std::mutex> lock(err_mu);
    if (!first_error) first_error = ep;
  };
  auto failed = [&] {
    std::lock_guard<std::mutex> lock(err_mu);
    return static_cast<bool>(first_error);
  };
  auto worker = [&] {
    for (;;) {
      size_t i = cursor.fetch_add(1);
      if (i >= claims.size() || failed()) return;
      const std::string ctx = "claim '" + claims[i].id + "': ";
      try {
        results[i] =
            veritrail::verify_claim(graph, claims[i], {}, config, *backend, &ledger, embedder_ptr);
      } catch (const veritrail::LmError& e) {
        store_error(std::make_exception_ptr(veritrail::LmError(e.kind, ctx + e.what())));
        return;
      } catch (const veritrail::PromptError& e) {
        store_error(std::make_exception_ptr(veritrail::PromptError(e.kind, ctx + e.what())));
        return;
      } catch (const veritrail::VerifierError& e) {
        store_error(std::make_exception_ptr(veritrail::VerifierError(e.kind, ctx + e.what())));
        return;
      } catch (const std::exception& e) {
        store_error(std::make_exception_ptr(veritrail::Error(ctx + e.what())));
        return;
      }
    }
  };

  int jobs = std::max(1, args.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  emit(args.out, veritrail::results_to_jsonl(results));

  if (!args.usage_report.empty()) {
    ordered_json rep;
    rep["claims"] = ordered_json::array();
    for (const auto& e : ledger.report()) {
      ordered_json row;
      row["claim_id"] = e.claim_id;
      row["prompt_tokens"] = e.prompt_tokens;
      row["completion_tokens"] = e.completion_tokens;
      row["calls"] = e.calls;
      row["cost"] = e.cost;
      rep["claims"].push_back(std::move(row));
    }
    rep["total_cost"] = ledger.total_cost();
    write_file(args.usage_report, rep.dump(2) + "\n");
  }
  return 0;
}

struct SynthArgs {
  std::string out_dir;
  std::string shape = "hier";
  int fanout = 2;
  int depth = 3;
  int chunks = 4;
  int communities = 2;
  int facts_per_root = 2;
  std::string inject = "none";
  int inject_stage = 2;
  std::string inject_text;
  uint64_t seed = 0;
};

int cmd_synth(const SynthArgs& args) {
  veritrail::SynthSpec spec;
  spec.shape = args.shape == "graphrag" ? veritrail::SynthSpec::Shape::GraphRagLike
                                        : veritrail::SynthSpec::Shape::HierSumm;
  spec.fanout = args.fanout;
  spec.depth = args.depth;
  spec.chunks = args.chunks;
  spec.communities = args.communities;
  spec.facts_per_root = args.facts_per_root;
  spec.seed = args.seed;
  if (args.inject != "none") {
    veritrail::Injection inj;
    inj.mode = args.inject == "drop" ? veritrail::InjectMode::DropAndReintroduce
                                     : veritrail::InjectMode::Insert;
    inj.stage = args.inject_stage;
    if (!args.inject_text.empty()) inj.text = args.inject_text;
    spec.inject = inj;
  }

  veritrail::SynthCase synth = veritrail::generate_case(spec);

  std::filesystem::create_directories(args.out_dir);
  auto path = [&](const char* name) {
    return (std::filesystem::path(args.out_dir) / name).string();
  };
  write_file(path("graph.json"), veritrail::graph_to_json(synth.graph).dump(2) + "\n");
  write_file(path("claims.jsonl"), veritrail::claims_to_jsonl(synth.claims));
  std::string gold;
  for (const auto& c : synth.claims) {
    ordered_json row;
    row["id"] = c.id;
    row["gold"] = veritrail::to_string(synth.gold.at(c.id));
    gold += row.dump();
    gold += '\n';
  }
  write_file(path("gold.jsonl"), gold);
  ordered_json stages = ordered_json::object();
  for (const auto& [id, set] : synth.gold_stages) stages[id] = set;
  write_file(path("gold_stages.json"), stages.dump(2) + "\n");
  return 0;
}

struct EvalArgs {
  std::string results_file;
  std::string gold_file;
  bool soft = false;
  std::string out = "-";
};

int cmd_eval(const EvalArgs& args) {
  std::vector<veritrail::ClaimResult> results =
      veritrail::results_from_jsonl(read_file(args.results_file));
  std::map<std::string, veritrail::Verdict> gold;
  {
    std::istringstream in(read_file(args.gold_file));
    std::string line;
    while (std::getline(in, line)) {
      if (veritrail::trim(line).empty()) continue;
      json j = json::parse(line);
      gold[j.at("id").get<std::string>()] =
          veritrail::verdict_from_string(j.at("gold").get<std::string>());
    }
  }

  std::map<std::string, const veritrail::ClaimResult*> by_id;
  for (const auto& r : results) by_id[r.claim_id] = &r;
  for (const auto& [id, v] : gold)
    if (!by_id.count(id)) throw veritrail::Error("id mismatch: no result for gold claim '" + id + "'");
  for (const auto& [id, r] : by_id)
    if (!gold.count(id)) throw veritrail::Error("id mismatch: no gold label for claim '" + id + "'");

  ordered_json report;
  if (args.soft) {
    std::vector<std::pair<bool, double>> scored;
    for (const auto& [id, v] : gold) {
      const veritrail::ClaimResult& r = *by_id.at(id);
      double score = r.terminated ? 0.0 : r.soft_score.value_or(0.0);
      scored.emplace_back(v == veritrail::Verdict::FullySupported, score);
    }
    report["mode"] = "soft";
    report["pairs"] = scored.size();
    report["auroc"] = veritrail::auroc(scored);
  } else {
    std::vector<veritrail::BinaryPair> pairs;
    long excluded = 0;
    for (const auto& [id, v] : gold) {
      const veritrail::ClaimResult& r = *by_id.at(id);
      if (r.terminated || r.final_verdict == veritrail::Verdict::Inconclusive) {
        ++excluded;
        continue;
      }
      veritrail::BinaryPair p;
      p.gold_fs = v == veritrail::Verdict::FullySupported;
      p.pred_fs = r.final_verdict == veritrail::Verdict::FullySupported;
      pairs.push_back(p);
    }
    veritrail::HardMetrics m = veritrail::hard_metrics(pairs);
    report["mode"] = "hard";
    report["pairs"] = pairs.size();
    report["excluded"] = excluded;
    auto cls = [](const veritrail::ClassMetrics& c) {
      ordered_json j;
      j["precision"] = c.precision;
      j["recall"] = c.recall;
      j["f1"] = c.f1;
      j["support"] = c.support;
      return j;
    };
    report["fs"] = cls(m.fs);
    report["nfs"] = cls(m.nfs);
    report["macro_f1"] = m.macro_f1;
    report["balanced_accuracy"] = m.balanced_accuracy;
  }
  emit(args.out, report.dump(2) + "\n");
  return 0;
}

struct TraceArgs {
  std::string results_file;
  std::string graph_file;
  std::string format = "text";
  std::string out = "-";
};

int cmd_trace_report(const TraceArgs& args) {
  veritrail::ProcessGraph graph =
      veritrail::graph_from_json(json::parse(read_file(args.graph_file)));
  std::vector<veritrail::ClaimResult> results =
      veritrail::results_from_jsonl(read_file(args.results_file));
  veritrail::TrailFormat fmt = args.format == "text" ? veritrail::TrailFormat::Text
                                                     : veritrail::TrailFormat::Markdown;
  std::string out;
  for (const auto& r : results) {
    if (!out.empty()) out += "\n";
    out += veritrail::render_trail(r, graph, fmt);
  }
  emit(args.out, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed-domain hallucination detection with traceability over process graphs"};
  app.require_subcommand(1);

  std::string validate_graph;
  CLI::App* validate = app.add_subcommand("validate", "check a process graph file");
  validate->add_option("graph", validate_graph, "graph json file")->required();

  VerifyArgs va;
  CLI::App* verify = app.add_subcommand("verify", "verify claims against a process graph");
  verify->add_option("--graph", va.graph_file, "graph json file")->required();
  verify->add_option("--claims", va.claims_file, "claims jsonl file")->required();
  verify->add_option("--out", va.out, "results jsonl file, - for stdout");
  verify->add_option("--q", va.q, "consecutive not-supported verdicts before stopping");
  verify->add_option("--evidence-limit", va.evidence_limit, "sentences per evidence prompt");
  verify->add_option("--verdict-limit", va.verdict_limit, "sentence cap for non-root verdict input");
  verify->add_option("--verdict-limit-root", va.verdict_limit_root,
                     "sentence cap once all evidence nodes are roots");
  verify->add_option("--max-reruns", va.max_reruns, "verdict reruns before truncation");
  verify->add_option("--max-decomp", va.max_decomp, "decomposition attempt budget");
  verify->add_option("--samples", va.samples, "consensus samples per step, 0 for single-shot");
  verify->add_option("--threshold-t", va.threshold_t, "consensus vote threshold");
  verify->add_option("--strategy", va.strategy, "evidence strategy")
      ->check(CLI::IsMember({"lm", "vtrag"}));
  verify->add_option("--k", va.top_k, "top-k nodes for the vtrag strategy");
  verify->add_option("--backend", va.backend, "model backend")
      ->check(CLI::IsMember({"scripted", "replay", "http"}));
  verify->add_option("--transcript", va.transcript, "json array of replay responses");
  verify->add_option("--endpoint", va.endpoint, "chat completions endpoint");
  verify->add_option("--model", va.model, "model name for the http backend");
  verify->add_option("--seed", va.seed, "request seed");
  verify->add_option("--jobs", va.jobs, "concurrent claim verifications");
  verify->add_option("--usage-report", va.usage_report, "write token usage json here");
  verify->add_option("--prompt-price", va.prompt_price, "usd per 1k prompt tokens");
  verify->add_option("--completion-price", va.completion_price, "usd per 1k completion tokens");

  SynthArgs sa;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic benchmark case");
  synth->add_option("out_dir", sa.out_dir, "output directory")->required();
  synth->add_option("--shape", sa.shape, "process shape")
      ->check(CLI::IsMember({"hier", "graphrag"}));
  synth->add_option("--fanout", sa.fanout, "children per summary (hier)");
  synth->add_option("--depth", sa.depth, "stage count (hier)");
  synth->add_option("--chunks", sa.chunks, "root chunk count (graphrag)");
  synth->add_option("--communities", sa.communities, "community report count (graphrag)");
  synth->add_option("--facts-per-root", sa.facts_per_root, "planted facts per root");
  synth->add_option("--inject", sa.inject, "hallucination injection mode")
      ->check(CLI::IsMember({"none", "insert", "drop"}));
  synth->add_option("--inject-stage", sa.inject_stage, "stage where the planted claim appears");
  synth->add_option("--inject-text", sa.inject_text, "override the planted claim text");
  synth->add_option("--seed", sa.seed, "generation seed");

  EvalArgs ea;
  CLI::App* eval = app.add_subcommand("eval", "score results against gold labels");
  eval->add_option("--results", ea.results_file, "results jsonl file")->required();
  eval->add_option("--gold", ea.gold_file, "gold jsonl file")->required();
  eval->add_flag("--soft", ea.soft, "score soft predictions with auroc");
  eval->add_option("--out", ea.out, "report file, - for stdout");

  TraceArgs ta;
  CLI::App* trace = app.add_subcommand("trace-report", "render evidence trails");
  trace->add_option("--results", ta.results_file, "results jsonl file")->required();
  trace->add_option("--graph", ta.graph_file, "graph json file")->required();
  trace->add_option("--format", ta.format, "report format")
      ->check(CLI::IsMember({"text", "markdown"}));
  trace->add_option("--out", ta.out, "report file, - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(validate_graph);
    if (verify->parsed()) return cmd_verify(va);
    if (synth->parsed()) return cmd_synth(sa);
    if (eval->parsed()) return cmd_eval(ea);
    return cmd_trace_report(ta);
  } catch (const veritrail::LmError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return 3;
  } catch (const veritrail::PromptError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return 3;
  } catch (const veritrail::VerifierError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind == veritrail::VerifierError::Kind::InvalidConfig ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
