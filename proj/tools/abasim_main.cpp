/*
 * Copyright 2026 The Abasim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "abasim/behavior_model.hpp"
#include "abasim/child_agent.hpp"
#include "abasim/cleaning.hpp"
#include "abasim/corpus_io.hpp"
#include "abasim/corpus_stats.hpp"
#include "abasim/doctor_agent.hpp"
#include "abasim/http_backend.hpp"
#include "abasim/metrics.hpp"
#include "abasim/orchestrator.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitBackendError = 2;
constexpr int kExitInternalError = 3;

struct Settings {
  std::string backend_type = "scripted";  // scripted | http
  std::string base_url;
  std::string model_name;
  std::string api_key_env = "ABASIM_API_KEY";
  std::string templates_dir = "templates";
  int max_retries = 3;
  int timeout_seconds = 60;
  double temperature_reason = 0.2;
  double temperature_act = 0.7;
  int max_tokens = 256;

  int k = 2;
  double alpha = 0.3;
  double lambda = 0.5;
  std::uint64_t backoff_threshold = 3;

  std::size_t min_turns = 5;
  std::string replacement = "child";

  double epsilon = 1e-9;
  std::string tokenization = "characters";  // characters | words
  bool per_dialogue = false;
};

Settings load_settings(const std::string& config_path) {
  Settings s;
  if (config_path.empty()) return s;
  std::ifstream in(config_path);
  if (!in) throw abasim::ArgumentError("cannot open config file: " + config_path);
  json cfg = json::parse(in, nullptr, false);
  if (cfg.is_discarded()) throw abasim::ParseError("config file is not valid JSON");
  if (cfg.contains("backend")) {
    const json& b = cfg["backend"];
    s.backend_type = b.value("type", s.backend_type);
    s.base_url = b.value("base_url", s.base_url);
    s.model_name = b.value("model", s.model_name);
    s.api_key_env = b.value("api_key_env", s.api_key_env);
    s.templates_dir = b.value("templates_dir", s.templates_dir);
    s.max_retries = b.value("max_retries", s.max_retries);
    s.timeout_seconds = b.value("timeout_seconds", s.timeout_seconds);
    s.temperature_reason = b.value("temperature_reason", s.temperature_reason);
    s.temperature_act = b.value("temperature_act", s.temperature_act);
    s.max_tokens = b.value("max_tokens", s.max_tokens);
  }
  if (cfg.contains("fit")) {
    const json& f = cfg["fit"];
    s.k = f.value("k", s.k);
    s.alpha = f.value("alpha", s.alpha);
    s.lambda = f.value("lambda", s.lambda);
    s.backoff_threshold = f.value("backoff_threshold", s.backoff_threshold);
  }
  if (cfg.contains("clean")) {
    const json& c = cfg["clean"];
    s.min_turns = c.value("min_turns", s.min_turns);
    s.replacement = c.value("replacement", s.replacement);
  }
  if (cfg.contains("metrics")) {
    const json& m = cfg["metrics"];
    s.epsilon = m.value("epsilon", s.epsilon);
    s.tokenization = m.value("tokenization", s.tokenization);
    s.per_dialogue = m.value("per_dialogue", s.per_dialogue);
  }
  return s;
}

std::unique_ptr<abasim::TextBackend> make_backend(const Settings& s) {
  if (s.backend_type == "scripted") return std::make_unique<abasim::DeterministicBackend>();
  if (s.backend_type == "http") {
    abasim::HttpBackendConfig cfg;
    cfg.base_url = s.base_url;
    cfg.model = s.model_name;
    cfg.api_key_env = s.api_key_env;
    cfg.max_retries = s.max_retries;
    cfg.timeout_seconds = s.timeout_seconds;
    return std::make_unique<abasim::HttpBackend>(cfg);
  }
  throw abasim::ArgumentError("unknown backend type: " + s.backend_type);
}

abasim::PromptLibrary load_prompts(const Settings& s) {
  return abasim::PromptLibrary::from_directory(s.templates_dir);
}

abasim::DoctorAgentConfig doctor_config(const Settings& s) {
  abasim::DoctorAgentConfig cfg;
  cfg.reason_params.temperature = s.temperature_reason;
  cfg.reason_params.max_tokens = s.max_tokens;
  cfg.act_params.temperature = s.temperature_act;
  cfg.act_params.max_tokens = s.max_tokens;
  return cfg;
}

std::vector<std::string> read_lexicon(const std::string& path) {
  std::vector<std::string> names;
  if (path.empty()) return names;
  std::ifstream in(path);
  if (!in) throw abasim::ArgumentError("cannot open lexicon file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    std::string name = abasim::trim(line);
    if (!name.empty()) names.push_back(name);
  }
  return names;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw abasim::ArgumentError("cannot open output file: " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw abasim::ArgumentError("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ordered_json segments_to_json(const abasim::DoctorTurn& turn) {
  ordered_json arr = ordered_json::array();
  for (const abasim::DoctorSegment& seg : turn.segments) {
    arr.push_back({{"strategy", abasim::to_label(seg.strategy)}, {"text", seg.text}});
  }
  return arr;
}

abasim::Tokenization tokenization_mode(const Settings& s) {
  if (s.tokenization == "characters") return abasim::Tokenization::Characters;
  if (s.tokenization == "words") return abasim::Tokenization::Words;
  throw abasim::ArgumentError("unknown tokenization mode: " + s.tokenization);
}

// --------------------------------------------------------------------------
// ingest

int cmd_ingest(const Settings& settings, const std::string& corpus_path,
               const std::string& profiles_path, const std::string& lexicon_path,
               std::size_t min_turns, const std::string& out_path,
               const std::string& report_path) {
  std::vector<abasim::Dialogue> dialogues = abasim::parse_corpus_file(corpus_path);
  if (!profiles_path.empty()) {
    std::vector<abasim::ChildProfile> profiles = abasim::parse_profiles_file(profiles_path);
    std::set<std::string> known;
    for (const abasim::ChildProfile& p : profiles) known.insert(p.child_id);
    for (const abasim::Dialogue& d : dialogues) {
      if (!known.count(d.child_id)) {
        std::cerr << "warning: dialogue " << d.dialogue_id << " references unknown child "
                  << d.child_id << "\n";
      }
    }
  }
  abasim::CleanOptions options;
  options.replacement = settings.replacement;
  abasim::CleanReport report;
  std::vector<abasim::Dialogue> cleaned =
      abasim::clean_corpus(dialogues, min_turns, read_lexicon(lexicon_path), options, &report);
  abasim::write_corpus_file(out_path, cleaned);

  ordered_json report_json;
  report_json["input_dialogues"] = report.input_count;
  report_json["removed_short"] = report.removed_short;
  report_json["removed_entity_focused"] = report.removed_entity_focused;
  report_json["name_substitutions"] = report.substitutions;
  report_json["output_dialogues"] = report.output_count;
  std::string rendered = report_json.dump(2) + "\n";
  if (!report_path.empty()) write_text_file(report_path, rendered);
  std::cout << rendered;
  return kExitOk;
}

// --------------------------------------------------------------------------
// fit

int cmd_fit(const std::string& corpus_path, const abasim::FitOptions& options,
            const std::string& out_path) {
  std::vector<abasim::Dialogue> dialogues = abasim::parse_corpus_file(corpus_path);
  if (dialogues.empty()) throw abasim::ArgumentError("corpus is empty: " + corpus_path);
  abasim::BehaviorModel model = abasim::fit_model(dialogues, options);
  write_text_file(out_path, abasim::save_model(model) + "\n");
  std::cout << "fitted model on " << dialogues.size() << " dialogues ("
            << model.personal.size() << " children) -> " << out_path << "\n";
  return kExitOk;
}

// --------------------------------------------------------------------------
// stats

int cmd_stats(const std::string& corpus_path, const std::string& out_path) {
  std::vector<abasim::Dialogue> dialogues = abasim::parse_corpus_file(corpus_path);
  abasim::CorpusStats stats = abasim::dialogue_stats(dialogues);
  abasim::StrategyDistribution strategies = abasim::strategy_distribution(dialogues);
  abasim::ResponseDistribution responses = abasim::response_distribution(dialogues);

  ordered_json j;
  j["dialogues"] = stats.dialogue_count;
  j["turns_per_dialogue"] = {{"mean", stats.turns_per_dialogue.mean},
                             {"std", stats.turns_per_dialogue.stddev}};
  j["doctor_utterance_chars"] = {{"mean", stats.doctor_utterance_chars.mean},
                                 {"std", stats.doctor_utterance_chars.stddev}};
  j["child_utterance_chars"] = {{"mean", stats.child_utterance_chars.mean},
                                {"std", stats.child_utterance_chars.stddev}};
  ordered_json by_strategy;
  for (const auto& [strategy, stat] : stats.doctor_by_strategy) {
    by_strategy[abasim::to_label(strategy)] = {{"mean", stat.mean}, {"std", stat.stddev}};
  }
  j["doctor_chars_by_strategy"] = std::move(by_strategy);
  ordered_json by_type;
  for (const auto& [type, stat] : stats.child_by_type) {
    by_type[abasim::to_label(type)] = {{"mean", stat.mean}, {"std", stat.stddev}};
  }
  j["child_chars_by_type"] = std::move(by_type);
  ordered_json strategy_json;
  for (abasim::Strategy s : abasim::kSegmentStrategies) {
    strategy_json[abasim::to_label(s)] = strategies[abasim::strategy_index(s)];
  }
  j["strategy_distribution"] = std::move(strategy_json);
  ordered_json response_json;
  for (abasim::ResponseType r : abasim::kResponseTypes) {
    response_json[abasim::to_label(r)] = responses[abasim::response_index(r)];
  }
  j["response_distribution"] = std::move(response_json);

  std::string rendered = j.dump(2) + "\n";
  if (!out_path.empty()) write_text_file(out_path, rendered);
  std::cout << rendered;
  return kExitOk;
}

// --------------------------------------------------------------------------
// synthesize

int cmd_synthesize(const Settings& settings, const std::string& model_path,
                   const std::string& reference_path, const std::vector<std::string>& topics,
                   std::size_t count, const std::string& profiles_path, std::uint64_t seed,
                   int parallelism, const std::string& out_prefix) {
  abasim::BehaviorModel model = abasim::load_model(read_text_file(model_path));
  std::unique_ptr<abasim::TextBackend> backend = make_backend(settings);
  abasim::PromptLibrary prompts = load_prompts(settings);
  abasim::DoctorAgent doctor(*backend, prompts, doctor_config(settings));

  std::map<std::string, abasim::ChildProfile> profiles;
  if (!profiles_path.empty()) {
    for (abasim::ChildProfile& p : abasim::parse_profiles_file(profiles_path)) {
      profiles[p.child_id] = std::move(p);
    }
  }

  std::vector<abasim::Dialogue> reference;
  if (!reference_path.empty()) {
    reference = abasim::parse_corpus_file(reference_path);
    if (reference.empty()) throw abasim::ArgumentError("reference corpus is empty");
  } else {
    if (topics.empty() || count == 0) {
      throw abasim::ArgumentError("synthesize needs --reference or --topics with --count");
    }
    // Free mode is expressed as a synthetic reference set: topics round-robin,
    // turn budgets drawn from the fitted length model up front so they do not
    // depend on the parallelism.
    std::vector<std::string> child_ids;
    for (const auto& [child_id, stats] : model.personal) child_ids.push_back(child_id);
    if (child_ids.empty()) child_ids.push_back("global");
    abasim::Rng length_rng(abasim::Rng::derive(seed, 0x6c656e));
    for (std::size_t i = 0; i < count; ++i) {
      abasim::Dialogue ref;
      char suffix[16];
      std::snprintf(suffix, sizeof(suffix), "%04zu", i);
      ref.dialogue_id = std::string("ref_") + suffix;
      ref.topic = topics[i % topics.size()];
      ref.child_id = child_ids[i % child_ids.size()];
      int target = abasim::sample_length(model.length_mu, model.length_sigma, length_rng);
      abasim::DoctorTurn filler;
      filler.segments.push_back({abasim::Strategy::Other, "-"});
      for (int t = 0; t < target; ++t) ref.turns.emplace_back(filler);
      reference.push_back(std::move(ref));
    }
  }

  std::vector<abasim::SessionResult> results =
      abasim::synthesize_matched(doctor, model, *backend, prompts, reference, profiles, seed,
                                 parallelism);

  std::ostringstream corpus_out;
  std::ostringstream traces_out;
  std::size_t failed = 0;
  for (const abasim::SessionResult& result : results) {
    if (result.complete) {
      corpus_out << abasim::serialize_dialogue(result.dialogue) << '\n';
    } else {
      ++failed;
      std::cerr << "session " << result.dialogue.dialogue_id
                << " aborted: " << result.error << "\n";
    }
    for (const abasim::TurnTrace& trace : result.traces) {
      ordered_json line = abasim::trace_to_json(trace);
      line["dialogue_id"] = result.dialogue.dialogue_id;
      traces_out << line.dump() << '\n';
    }
  }
  write_text_file(out_prefix + ".jsonl", corpus_out.str());
  write_text_file(out_prefix + ".traces.jsonl", traces_out.str());

  ordered_json meta;
  meta["seed"] = seed;
  meta["sessions"] = results.size();
  meta["failed"] = failed;
  meta["model"] = model_path;
  meta["backend"] = settings.backend_type;
  write_text_file(out_prefix + ".meta.json", meta.dump(2) + "\n");

  std::cout << "synthesized " << (results.size() - failed) << "/" << results.size()
            << " sessions -> " << out_prefix << ".jsonl\n";
  return failed == 0 ? kExitOk : kExitBackendError;
}

// --------------------------------------------------------------------------
// predict

int cmd_predict(const Settings& settings, const std::string& corpus_path, std::uint64_t seed,
                const std::string& out_prefix) {
  (void)seed;  // recorded in metadata; the doctor itself is seedless
  std::vector<abasim::Dialogue> dialogues = abasim::parse_corpus_file(corpus_path);
  if (dialogues.empty()) throw abasim::ArgumentError("corpus is empty: " + corpus_path);
  std::unique_ptr<abasim::TextBackend> backend = make_backend(settings);
  abasim::PromptLibrary prompts = load_prompts(settings);
  abasim::DoctorAgent doctor(*backend, prompts, doctor_config(settings));

  std::ostringstream pairs_out;
  std::ostringstream traces_out;
  std::size_t pair_count = 0;
  std::size_t errors = 0;
  for (const abasim::Dialogue& dialogue : dialogues) {
    std::vector<abasim::PredictionPair> pairs =
        abasim::sliding_window_predict(doctor, dialogue);
    for (const abasim::PredictionPair& pair : pairs) {
      ++pair_count;
      ordered_json line;
      line["dialogue_id"] = dialogue.dialogue_id;
      line["position"] = pair.position;
      line["reference"] = segments_to_json(pair.reference);
      if (pair.predicted) {
        line["predicted"] = segments_to_json(*pair.predicted);
      } else {
        line["predicted"] = nullptr;
      }
      if (!pair.error.empty()) {
        line["error"] = pair.error;
        ++errors;
      }
      pairs_out << line.dump() << '\n';
      if (pair.trace) {
        ordered_json trace_line = abasim::trace_to_json(*pair.trace);
        trace_line["dialogue_id"] = dialogue.dialogue_id;
        trace_line["position"] = pair.position;
        traces_out << trace_line.dump() << '\n';
      }
    }
  }
  write_text_file(out_prefix + ".pairs.jsonl", pairs_out.str());
  write_text_file(out_prefix + ".traces.jsonl", traces_out.str());

  ordered_json meta;
  meta["seed"] = seed;
  meta["pairs"] = pair_count;
  meta["errors"] = errors;
  meta["backend"] = settings.backend_type;
  write_text_file(out_prefix + ".meta.json", meta.dump(2) + "\n");

  std::cout << "predicted " << pair_count << " turns (" << errors << " errors) -> "
            << out_prefix << ".pairs.jsonl\n";
  return errors == 0 ? kExitOk : kExitBackendError;
}

// --------------------------------------------------------------------------
// evaluate

std::vector<std::pair<std::vector<abasim::Strategy>, std::vector<abasim::Strategy>>>
read_pairs_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw abasim::ArgumentError("cannot open pairs file: " + path);
  std::vector<std::pair<std::vector<abasim::Strategy>, std::vector<abasim::Strategy>>> pairs;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw abasim::ParseError("pair record is not valid JSON", line_number);
    auto extract = [](const json& arr) {
      std::vector<abasim::Strategy> strategies;
      for (const auto& seg : arr) {
        strategies.push_back(
            abasim::require_strategy_label(seg.at("strategy").get<std::string>()));
      }
      return strategies;
    };
    std::vector<abasim::Strategy> reference = extract(j.at("reference"));
    std::vector<abasim::Strategy> predicted;
    if (j.contains("predicted") && !j["predicted"].is_null()) {
      predicted = extract(j["predicted"]);
    }
    pairs.emplace_back(std::move(predicted), std::move(reference));
  }
  return pairs;
}

int cmd_evaluate(const Settings& settings, const std::string& mode,
                 const std::string& real_path, const std::string& candidate_path,
                 const std::string& pairs_path, const std::string& traces_path,
                 const std::string& out_path) {
  ordered_json report_json;
  std::string table;
  if (mode == "divergence") {
    if (real_path.empty() || candidate_path.empty()) {
      throw abasim::ArgumentError("divergence mode needs --real and --candidate");
    }
    abasim::DivergenceOptions options;
    options.epsilon = settings.epsilon;
    options.tokenization = tokenization_mode(settings);
    options.per_dialogue = settings.per_dialogue;
    abasim::DivergenceReport report = abasim::corpus_divergence_report(
        abasim::parse_corpus_file(real_path), abasim::parse_corpus_file(candidate_path),
        options);
    report_json = abasim::divergence_report_to_json(report);
    table = abasim::divergence_report_to_table(report);
  } else if (mode == "consistency") {
    if (pairs_path.empty()) throw abasim::ArgumentError("consistency mode needs --pairs");
    abasim::ConsistencyReport report = abasim::strategy_consistency_report(
        read_pairs_file(pairs_path));
    report_json = abasim::consistency_report_to_json(report);
    table = abasim::consistency_report_to_table(report);
  } else {
    throw abasim::ArgumentError("mode must be 'divergence' or 'consistency'");
  }
  if (!traces_path.empty()) {
    std::ifstream in(traces_path, std::ios::binary);
    if (!in) throw abasim::ArgumentError("cannot open traces file: " + traces_path);
    std::vector<abasim::TurnTrace> traces = abasim::parse_traces(in);
    double rate = abasim::correct_trigger_rate(traces);
    report_json["correct_trigger_rate"] = rate;
    std::ostringstream extra;
    extra << "correct trigger rate: " << rate << " over " << traces.size() << " turns\n";
    table += extra.str();
  }
  std::string rendered = report_json.dump(2) + "\n";
  if (!out_path.empty()) write_text_file(out_path, rendered);
  std::cout << table << rendered;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"strategy-aware intervention dialogue synthesis and evaluation"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "global config file (JSON)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate and clean a raw corpus");
  std::string in_corpus, in_profiles, in_lexicon, in_out, in_report;
  std::size_t in_min_turns = 0;
  ingest->add_option("corpus", in_corpus, "raw corpus (JSON lines)")->required();
  ingest->add_option("--profiles", in_profiles, "child profiles (JSON lines)");
  ingest->add_option("--lexicon", in_lexicon, "names to redact, one per line");
  ingest->add_option("--min-turns", in_min_turns, "minimum speaker turns to keep");
  ingest->add_option("--out", in_out, "cleaned corpus output")->required();
  ingest->add_option("--report", in_report, "cleaning report output (JSON)");

  // fit
  auto* fit = app.add_subcommand("fit", "fit a child behavior model");
  std::string fit_corpus, fit_out;
  int fit_k = -1;
  double fit_alpha = -1.0, fit_lambda = -1.0;
  std::int64_t fit_backoff = -1;
  fit->add_option("corpus", fit_corpus, "cleaned corpus")->required();
  fit->add_option("--k", fit_k, "n-gram order");
  fit->add_option("--alpha", fit_alpha, "personal/global blending weight in [0,1]");
  fit->add_option("--lambda", fit_lambda, "add-lambda smoothing constant");
  fit->add_option("--backoff", fit_backoff, "minimum context count before backoff");
  fit->add_option("--out", fit_out, "model output path")->required();

  // stats
  auto* stats = app.add_subcommand("stats", "descriptive corpus statistics");
  std::string stats_corpus, stats_out;
  stats->add_option("corpus", stats_corpus, "corpus")->required();
  stats->add_option("--out", stats_out, "statistics output (JSON)");

  // synthesize
  auto* synth = app.add_subcommand("synthesize", "generate synthetic sessions");
  std::string syn_model, syn_reference, syn_profiles, syn_out;
  std::vector<std::string> syn_topics;
  std::size_t syn_count = 0;
  std::uint64_t syn_seed = 0;
  int syn_parallel = 1;
  synth->add_option("--model", syn_model, "fitted model file")->required();
  synth->add_option("--reference", syn_reference, "reference corpus to match");
  synth->add_option("--topics", syn_topics, "topics for free-form synthesis")->delimiter(',');
  synth->add_option("--count", syn_count, "number of sessions in free-form mode");
  synth->add_option("--profiles", syn_profiles, "child profiles (JSON lines)");
  synth->add_option("--seed", syn_seed, "base seed")->required();
  synth->add_option("--parallel", syn_parallel, "worker threads");
  synth->add_option("--out", syn_out, "output prefix")->required();

  // predict
  auto* predict = app.add_subcommand("predict", "sliding-window prediction on real dialogues");
  std::string pred_corpus, pred_out;
  std::uint64_t pred_seed = 0;
  predict->add_option("corpus", pred_corpus, "real corpus")->required();
  predict->add_option("--seed", pred_seed, "seed recorded in metadata")->required();
  predict->add_option("--out", pred_out, "output prefix")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "divergence or consistency report");
  std::string eval_mode, eval_real, eval_candidate, eval_pairs, eval_traces, eval_out;
  bool eval_per_dialogue = false;
  evaluate->add_option("--mode", eval_mode, "divergence | consistency")->required();
  evaluate->add_option("--real", eval_real, "real corpus");
  evaluate->add_option("--candidate", eval_candidate, "candidate corpus");
  evaluate->add_option("--pairs", eval_pairs, "prediction pairs file");
  evaluate->add_option("--traces", eval_traces, "turn traces file (adds trigger rate)");
  evaluate->add_flag("--per-dialogue", eval_per_dialogue,
                     "average distributions per dialogue instead of pooling");
  evaluate->add_option("--out", eval_out, "report output (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInputError;
  }

  try {
    Settings settings = load_settings(config_path);
    if (ingest->parsed()) {
      std::size_t min_turns = in_min_turns > 0 ? in_min_turns : settings.min_turns;
      return cmd_ingest(settings, in_corpus, in_profiles, in_lexicon, min_turns, in_out,
                        in_report);
    }
    if (fit->parsed()) {
      abasim::FitOptions options;
      options.k = fit_k > 0 ? fit_k : settings.k;
      options.alpha = fit_alpha >= 0.0 ? fit_alpha : settings.alpha;
      options.smoothing_lambda = fit_lambda > 0.0 ? fit_lambda : settings.lambda;
      options.backoff_threshold =
          fit_backoff >= 0 ? static_cast<std::uint64_t>(fit_backoff) : settings.backoff_threshold;
      if (fit_alpha > 1.0) throw abasim::ArgumentError("alpha must lie in [0,1]");
      return cmd_fit(fit_corpus, options, fit_out);
    }
    if (stats->parsed()) return cmd_stats(stats_corpus, stats_out);
    if (synth->parsed()) {
      return cmd_synthesize(settings, syn_model, syn_reference, syn_topics, syn_count,
                            syn_profiles, syn_seed, syn_parallel, syn_out);
    }
    if (predict->parsed()) return cmd_predict(settings, pred_corpus, pred_seed, pred_out);
    if (evaluate->parsed()) {
      settings.per_dialogue = settings.per_dialogue || eval_per_dialogue;
      return cmd_evaluate(settings, eval_mode, eval_real, eval_candidate, eval_pairs,
                          eval_traces, eval_out);
    }
    return kExitInputError;
  } catch (const abasim::BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kExitBackendError;
  } catch (const abasim::TurnError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kExitBackendError;
  } catch (const abasim::InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  } catch (const abasim::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const abasim::ValidationError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const abasim::ArgumentError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
}
