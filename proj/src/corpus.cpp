#include "ctxeq/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace ctxeq {

using ordered_json = nlohmann::ordered_json;

CorpusEntry parse_corpus_header(const std::string& path, const std::string& text) {
  CorpusEntry e;
  e.path = path;
  size_t open = text.find("(*");
  if (open == std::string::npos) return e;
  size_t close = text.find("*)", open);
  if (close == std::string::npos) return e;
  std::istringstream in(text.substr(open + 2, close - open - 2));
  std::string word;
  while (in >> word) {
    if (word == "expect:") {
      std::string v;
      in >> v;
      if (v == "ineq") e.expected = CorpusEntry::Expect::Ineq;
    } else if (word == "bound:") {
      uint64_t b;
      if (in >> b) e.bound_override = b;
    } else if (word == "fuel:") {
      uint64_t b;
      if (in >> b) e.fuel_override = b;
    } else if (word == "note:") {
      std::string rest;
      std::getline(in, rest);
      e.notes = rest;
    }
  }
  return e;
}

bool is_false_verdict(const FileOutcome& o) {
  if (!o.error.empty()) return false;
  if (o.expected == CorpusEntry::Expect::Eq && o.verdict == Verdict::K::Inequivalent) return true;
  if (o.expected == CorpusEntry::Expect::Ineq && o.verdict == Verdict::K::Equivalent) return true;
  return false;
}

FileOutcome check_file(const std::string& path, const Options& opts) {
  FileOutcome out;
  out.path = path;
  auto t0 = std::chrono::steady_clock::now();
  try {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    CorpusEntry entry = parse_corpus_header(path, text);
    out.expected = entry.expected;
    Options o = opts;
    if (entry.bound_override) o.bound = *entry.bound_override;
    if (entry.fuel_override) o.fuel = *entry.fuel_override;
    NameGen gen;
    ProgramPair pair = parse_program_pair(text, gen);
    out.full = check_equiv(pair, o);
    out.verdict = out.full.k;
  } catch (const std::exception& ex) {
    out.error = ex.what();
    out.verdict = Verdict::K::Inconclusive;
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::vector<std::string> discover_corpus(const std::string& dir) {
  std::vector<std::string> files;
  std::error_code ec;
  for (auto& p : std::filesystem::recursive_directory_iterator(dir, ec)) {
    if (p.is_regular_file() && p.path().extension() == ".prog") files.push_back(p.path().string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

namespace {
struct BenchConfig {
  std::string name;
  void (*tweak)(Options&);
};

const BenchConfig kConfigs[] = {
    {"default", [](Options&) {}},
    {"sep. off", [](Options& o) { o.separation = false; }},
    {"annot. off", [](Options& o) { o.annotations = false; }},
    {"ree. off", [](Options& o) { o.reentry = false; }},
    {"all off", [](Options& o) { o.all_upto = false; }},
};
}  // namespace

BenchResult run_bench(const std::vector<std::string>& files, const Options& base, int jobs) {
  BenchResult result;
  for (auto& cfg : kConfigs) {
    BenchConfigResult cr;
    cr.config_name = cfg.name;
    cr.files.resize(files.size());
    Options opts = base;
    cfg.tweak(opts);
    opts.normalize();

    std::atomic<size_t> next{0};
    auto worker = [&] {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= files.size()) return;
        cr.files[i] = check_file(files[i], opts);
      }
    };
    if (jobs <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    for (auto& f : cr.files) {
      cr.total_seconds += f.seconds;
      if (!f.error.empty()) {
        ++cr.errors;
        continue;
      }
      switch (f.verdict) {
        case Verdict::K::Equivalent: ++cr.eq_proved; break;
        case Verdict::K::Inequivalent: ++cr.ineq_found; break;
        case Verdict::K::Inconclusive: ++cr.inconclusive; break;
      }
      result.any_false_verdict |= is_false_verdict(f);
    }
    result.configs.push_back(std::move(cr));
  }
  return result;
}

std::string verdict_name(Verdict::K k) {
  switch (k) {
    case Verdict::K::Equivalent: return "equivalent";
    case Verdict::K::Inequivalent: return "inequivalent";
    case Verdict::K::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::string bench_table(const BenchResult& r) {
  // one `a | b [c]` cell per configuration: a equivalences proved,
  // b inequivalences found, c seconds in total
  std::ostringstream os;
  for (auto& c : r.configs) {
    char buf[128];
    snprintf(buf, sizeof buf, "%-12s  %llu | %llu [%.1fs]", c.config_name.c_str(),
             static_cast<unsigned long long>(c.eq_proved),
             static_cast<unsigned long long>(c.ineq_found), c.total_seconds);
    os << buf;
    if (c.errors) os << "  (" << c.errors << " errors)";
    os << "\n";
  }
  return os.str();
}

namespace {
ordered_json stats_json(const ExploreStats& s) {
  ordered_json j;
  j["nodes"] = s.nodes;
  j["memo_hits"] = s.memo_hits;
  j["solver_queries"] = s.solver_queries;
  j["max_depth"] = s.max_depth;
  j["sep_splits"] = s.sep_splits;
  j["sep_discharged"] = s.sep_discharged;
  j["reentry_skips"] = s.reentry_skips;
  j["inv_applied"] = s.inv_applied;
  j["inv_failed"] = s.inv_failed;
  j["taus_collapsed"] = s.taus_collapsed;
  return j;
}

ordered_json model_json(const Assignment& a) {
  ordered_json j = ordered_json::object();
  for (auto& [k, v] : a.values) j["_k#" + std::to_string(k)] = constant_to_string(v);
  return j;
}

ordered_json trace_json(const Trace& t) {
  ordered_json arr = ordered_json::array();
  for (auto& s : t) {
    ordered_json e;
    e["move"] = move_to_string(s.move);
    e["side"] = s.side == TraceStep::Side::Both ? "both"
                : s.side == TraceStep::Side::LeftOnly ? "left" : "right";
    arr.push_back(e);
  }
  return arr;
}
}  // namespace

std::string outcome_json(const FileOutcome& o) {
  ordered_json j;
  if (!o.error.empty()) {
    j["verdict"] = "error";
    j["error"] = o.error;
    return j.dump(2);
  }
  j["verdict"] = verdict_name(o.verdict);
  if (o.verdict == Verdict::K::Inequivalent) {
    j["trace"] = trace_json(o.full.witness);
    j["model"] = model_json(o.full.model);
  }
  if (o.verdict == Verdict::K::Inconclusive) {
    ordered_json rs = ordered_json::array();
    for (auto r : o.full.reasons) rs.push_back(reason_name(r));
    j["reasons"] = rs;
  }
  j["stats"] = stats_json(o.full.stats);
  j["seconds"] = o.seconds;
  return j.dump(2);
}

std::string bench_json(const BenchResult& r) {
  ordered_json j;
  ordered_json cfgs = ordered_json::array();
  for (auto& c : r.configs) {
    ordered_json cj;
    cj["config"] = c.config_name;
    cj["eq_proved"] = c.eq_proved;
    cj["ineq_found"] = c.ineq_found;
    cj["inconclusive"] = c.inconclusive;
    cj["errors"] = c.errors;
    cj["total_seconds"] = c.total_seconds;
    ordered_json files = ordered_json::array();
    for (auto& f : c.files) {
      ordered_json fj;
      fj["path"] = f.path;
      fj["expected"] = f.expected == CorpusEntry::Expect::Eq ? "eq" : "ineq";
      fj["verdict"] = f.error.empty() ? verdict_name(f.verdict) : "error";
      fj["seconds"] = f.seconds;
      files.push_back(fj);
    }
    cj["files"] = files;
    cfgs.push_back(cj);
  }
  j["configs"] = cfgs;
  j["false_verdicts"] = r.any_false_verdict;
  return j.dump(2);
}

std::string strip_timing_fields(const std::string& js) {
  ordered_json j = ordered_json::parse(js);
  std::function<void(ordered_json&)> scrub = [&](ordered_json& n) {
    if (n.is_object()) {
      n.erase("seconds");
      n.erase("total_seconds");
      for (auto& [k, v] : n.items()) scrub(v);
    } else if (n.is_array()) {
      for (auto& v : n) scrub(v);
    }
  };
  scrub(j);
  return j.dump(2);
}

}  // namespace ctxeq
