#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "isdq/isdq.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace
{

/// Bad arguments discovered after parsing; exits with 2.
struct UsageError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct RunConfig
{
  std::uint64_t seed = 0;
  int m = isdq::sim::ParamSpace{}.m;
  double alpha = isdq::traj::kDefaultAlpha;
  double lambda = isdq::rank::kDefaultLambda;
  double dt = isdq::sim::kDefaultDt;
  double cell_size = isdq::nav::kDefaultCellSize;
  int cells_per_side = isdq::diversity::kDefaultCellsPerSide;
  std::string cluster = "percentile";
  double eps = isdq::traj::kDefaultDbscanEps;
  int min_samples = isdq::traj::kDefaultDbscanMinSamples;
  double eps_d = isdq::score::kDefaultEpsD;
  double eps_t = isdq::score::kDefaultEpsT;
  std::string out;
  unsigned threads = std::max(1U, std::thread::hardware_concurrency());

  isdq::score::IsConfig is_config() const
  {
    isdq::score::IsConfig c;
    c.space.m = m;
    c.dt = dt;
    c.seed = seed;
    c.cell_size = cell_size;
    c.threads = threads;
    try
    {
      c.cluster.method = isdq::traj::parse_cluster_method(cluster);
    }
    catch (const std::exception& e)
    {
      throw UsageError(e.what());
    }
    c.cluster.alpha = alpha;
    c.cluster.eps = eps;
    c.cluster.min_samples = min_samples;
    return c;
  }
  isdq::score::BlConfig bl_config() const { return {eps_d, eps_t}; }
};

std::string read_text(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& p, const std::string& text)
{
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out || !(out << text)) throw std::runtime_error("cannot write " + p.string());
}

/// Writes to `--out`/name when an output directory is set, else to stdout.
void emit(const RunConfig& rc, const std::string& name, const std::string& text)
{
  if (rc.out.empty())
    std::cout << text;
  else
  {
    const fs::path p = fs::path(rc.out) / name;
    write_text(p, text);
    std::cout << p.string() << '\n';
  }
}

/// JSON files of a directory in name order, or the path itself.
std::vector<fs::path> json_files(const fs::path& p)
{
  if (!fs::is_directory(p))
  {
    if (!fs::exists(p)) throw UsageError("no such file or directory: " + p.string());
    return {p};
  }
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(p))
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  std::ranges::sort(out);
  if (out.empty()) throw UsageError("no .json files in " + p.string());
  return out;
}

std::vector<double> parse_list(const std::string& s)
{
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
  {
    try
    {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    }
    catch (const std::exception&)
    {
      throw UsageError("bad number in list: '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

// ---- gen ----

struct GenArgs
{
  std::string family;
  std::string which = "all";
  int count = 10;
  std::string gaps = "3,4,5,6,8,10";
};

int cmd_gen(const RunConfig& rc, const GenArgs& a)
{
  namespace gen = isdq::scene;
  std::vector<isdq::scene::Scenario> out;
  try
  {
    if (a.family == "exsd")
    {
      const auto& all = gen::exsd_benchmarks();
      const std::vector<std::string> names = a.which == "all" ? all : std::vector<std::string>{a.which};
      for (const auto& b : names)
        for (auto& s : gen::gen_exsd(b, rc.seed, a.count)) out.push_back(std::move(s));
    }
    else if (a.family == "egrd")
      out = gen::gen_egrd(rc.seed, a.count);
    else if (a.family == "hypothesis")
    {
      const auto& all = gen::hypothesis_tests();
      const std::vector<std::string> names = a.which == "all" ? all : std::vector<std::string>{a.which};
      for (const auto& t : names)
      {
        auto [s1, s2] = gen::gen_hypothesis(t);
        out.push_back(std::move(s1));
        out.push_back(std::move(s2));
      }
    }
    else if (a.family == "gap-study")
      out = gen::gen_gap_study(parse_list(a.gaps));
    else
      throw UsageError("unknown family '" + a.family + "'");
  }
  catch (const std::invalid_argument& e)
  {
    throw UsageError(e.what());
  }
  const fs::path dir = rc.out.empty() ? fs::path(".") : fs::path(rc.out);
  fs::create_directories(dir);
  for (const auto& s : out)
  {
    const fs::path p = dir / (s.name + ".json");
    isdq::scene::save_scenario_file(s, p);
    std::cout << p.string() << '\n';
  }
  return 0;
}

// ---- validate ----

int cmd_validate(const std::vector<std::string>& files)
{
  int failed = 0;
  for (const auto& f : files)
  {
    try
    {
      const auto s = isdq::scene::load_scenario_file(f);
      std::cout << "ok " << f << " (" << s.tasks.size() << " agents)\n";
    }
    catch (const std::exception& e)
    {
      std::cerr << "invalid " << f << ": " << e.what() << '\n';
      ++failed;
    }
  }
  return failed ? 1 : 0;
}

// ---- score ----

struct ScoreArgs
{
  std::vector<std::string> files;
  std::string method = "is";
  bool dump_trajectories = false;
};

int cmd_score(const RunConfig& rc, const ScoreArgs& a)
{
  if (a.method != "is" && a.method != "bl" && a.method != "both") throw UsageError("--method must be is, bl or both");
  if (a.dump_trajectories && (rc.out.empty() || a.method == "bl"))
    throw UsageError("--dump-trajectories needs --out and the is method");
  const auto cfg = rc.is_config();
  const auto bl = rc.bl_config();
  int failed = 0;
  for (const auto& f : a.files)
  {
    try
    {
      const auto s = isdq::scene::load_scenario_file(f);
      const std::string stem = fs::path(f).stem().string();
      if (a.method != "bl")
      {
        std::vector<isdq::sim::SimResult> runs;
        const auto sr = isdq::score::run_scenario(s, cfg, a.dump_trajectories ? &runs : nullptr);
        const auto rep = isdq::score::score_runs(sr, cfg.cluster);
        emit(rc, stem + ".is.json", isdq::score::to_json(rep, cfg).dump(2) + "\n");
        if (a.dump_trajectories)
        {
          std::ostringstream csv, modes;
          isdq::sim::write_trajectory_csv(csv, s.name, runs);
          isdq::traj::write_mode_table_csv(modes, isdq::traj::build_mode_table(sr.rows, cfg.cluster));
          emit(rc, stem + ".trajectories.csv", csv.str());
          emit(rc, stem + ".modes.csv", modes.str());
        }
      }
      if (a.method != "is")
        emit(rc, stem + ".bl.json", isdq::score::to_json(isdq::score::baseline_bl(s, bl, rc.cell_size), bl, rc.cell_size).dump(2) + "\n");
    }
    catch (const std::exception& e)
    {
      std::cerr << f << ": " << e.what() << '\n';
      ++failed;
    }
  }
  return failed ? 1 : 0;
}

// ---- dq ----

isdq::scene::DomainSample load_domain(const std::string& path)
{
  isdq::scene::DomainSample d;
  d.name = fs::path(path).filename().string();
  for (const auto& f : json_files(path)) d.scenarios.push_back(isdq::scene::load_scenario_file(f));
  return d;
}

int cmd_dq(const RunConfig& rc, const std::vector<std::string>& domains)
{
  if (rc.cells_per_side < 1) throw UsageError("--cells-per-side must be >= 1");
  ojson all = ojson::array();
  for (const auto& d : domains)
    all.push_back(isdq::diversity::to_json(isdq::diversity::dq(load_domain(d), {rc.cells_per_side})));
  emit(rc, "dq.json", all.dump(2) + "\n");
  return 0;
}

// ---- rank ----

struct RankArgs
{
  std::vector<std::string> sources;
  std::vector<std::string> targets;
  bool exclude_failed = false;
};

/// Scenario files are scored; IS reports are read back as they are.
isdq::score::IsReport report_from(const fs::path& f, const isdq::score::IsConfig& cfg)
{
  const ojson j = ojson::parse(read_text(f), nullptr, false);
  if (!j.is_discarded() && j.is_object() && j.value("method", "") == "is")
  {
    isdq::score::IsReport r;
    r.scenario = j.at("scenario").get<std::string>();
    r.label = j.value("label", "");
    for (const auto& a : j.at("per_agent"))
      r.per_agent.push_back({a.at("id").get<int>(), a.at("is_bits").get<double>(), a.value("mode_count", 1),
                             a.value("outliers", 0), a.value("reached_goal", true), a.value("reached_fraction", 1.0)});
    r.mean = j.value("mean", 0.0);
    r.std = j.value("std", 0.0);
    return r;
  }
  return isdq::score::is_scenario(isdq::scene::load_scenario_file(f), cfg);
}

int cmd_rank(const RunConfig& rc, const RankArgs& a)
{
  const auto cfg = rc.is_config();
  std::vector<isdq::rank::NamedValue> sources, targets;
  for (const auto& d : a.sources)
    sources.push_back({fs::path(d).filename().string(), isdq::diversity::dq(load_domain(d), {rc.cells_per_side}).dq});
  for (const auto& d : a.targets)
  {
    std::vector<isdq::score::IsReport> reports;
    for (const auto& f : json_files(d)) reports.push_back(report_from(f, cfg));
    targets.push_back({fs::path(d).filename().string(), isdq::score::is_domain(reports, a.exclude_failed).mean});
  }
  const isdq::rank::RankConfig rcfg{rc.lambda};
  const auto pairs = isdq::rank::rank_pairs(sources, targets, rcfg);
  ojson j = isdq::rank::to_json(pairs, rcfg);
  j["best_source"] = isdq::rank::select_source(sources);
  j["best_target"] = isdq::rank::select_target(targets);
  emit(rc, "rank.json", j.dump(2) + "\n");
  return 0;
}

// ---- plot ----

struct PlotArgs
{
  std::string scenario;
  std::string trajectories;
  std::string modes;
  std::vector<std::string> reports;
  bool per_agent = false;
  std::string svg;
};

int cmd_plot_scenario(const PlotArgs& a)
{
  const auto s = isdq::scene::load_scenario_file(a.scenario);
  std::vector<isdq::sim::CsvRun> runs;
  if (!a.trajectories.empty())
  {
    std::ifstream in(a.trajectories);
    if (!in) throw std::runtime_error("cannot open " + a.trajectories);
    runs = isdq::sim::read_trajectory_csv(in);
  }
  std::optional<isdq::traj::ModeTable> modes;
  if (!a.modes.empty())
  {
    std::ifstream in(a.modes);
    if (!in) throw std::runtime_error("cannot open " + a.modes);
    modes = isdq::traj::read_mode_table_csv(in);
  }
  write_text(a.svg, isdq::svg::scenario_view(s, runs, modes ? &*modes : nullptr));
  std::cout << a.svg << '\n';
  return 0;
}

/// One box per label, in first-seen order.
int cmd_plot_box(const PlotArgs& a)
{
  std::vector<isdq::svg::BoxGroup> groups;
  std::string unit;
  for (const auto& r : a.reports)
    for (const auto& f : json_files(r))
    {
      const ojson j = ojson::parse(read_text(f));
      const std::string method = j.at("method").get<std::string>();
      if (unit.empty()) unit = method;
      if (method != unit) throw UsageError("cannot mix is and bl reports in one plot");
      std::string label = j.value("label", "");
      if (label.empty()) label = j.at("scenario").get<std::string>();
      auto it = std::ranges::find(groups, label, &isdq::svg::BoxGroup::name);
      if (it == groups.end()) it = groups.insert(groups.end(), {label, {}});
      if (a.per_agent)
        for (const auto& ag : j.at("per_agent")) it->values.push_back(ag.at(method == "is" ? "is_bits" : "bl_count").get<double>());
      else
        it->values.push_back(j.at("mean").get<double>());
    }
  const std::string y = unit == "bl" ? "BL count" : "IS (bits)";
  write_text(a.svg, isdq::svg::box_plot(groups, a.per_agent ? y + ", per agent" : y + ", scenario mean"));
  std::cout << a.svg << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Interaction and diversity scores for multi-agent navigation scenarios"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig rc;
  app.add_option("--seed", rc.seed, "Random seed")->capture_default_str();
  app.add_option("--m", rc.m, "Parameter samples per scenario")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--alpha", rc.alpha, "Modes per unit of mean DTW")->capture_default_str();
  app.add_option("--lambda", rc.lambda, "Weight of DQ in ISDQ")->capture_default_str();
  app.add_option("--dt", rc.dt, "Simulation step (s)")->capture_default_str();
  app.add_option("--cell-size", rc.cell_size, "Planning grid cell (m)")->capture_default_str();
  app.add_option("--cells-per-side", rc.cells_per_side, "DQ grid resolution")->capture_default_str();
  app.add_option("--cluster", rc.cluster, "percentile or dbscan")
      ->capture_default_str()
      ->check(CLI::IsMember({"percentile", "dbscan"}));
  app.add_option("--eps", rc.eps, "DBSCAN radius")->capture_default_str();
  app.add_option("--min-samples", rc.min_samples, "DBSCAN core size")->capture_default_str();
  app.add_option("--eps-d", rc.eps_d, "Baseline distance threshold (m)")->capture_default_str();
  app.add_option("--eps-t", rc.eps_t, "Baseline time threshold (s)")->capture_default_str();
  app.add_option("--out", rc.out, "Output directory (stdout when empty)");
  app.add_option("--threads", rc.threads, "Worker threads for the sweep")->capture_default_str()->check(CLI::PositiveNumber);

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "Generate scenario files");
  gen->add_option("family", ga.family, "exsd, egrd, hypothesis or gap-study")->required();
  gen->add_option("which", ga.which, "Benchmark or test name")->capture_default_str();
  gen->add_option("--count", ga.count, "Scenarios per benchmark")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--gaps", ga.gaps, "Comma-separated gap widths (m)")->capture_default_str();

  std::vector<std::string> vfiles;
  auto* val = app.add_subcommand("validate", "Check scenario files");
  val->add_option("files", vfiles)->required();

  ScoreArgs sa;
  auto* score = app.add_subcommand("score", "Score scenario files");
  score->add_option("files", sa.files)->required();
  score->add_option("--method", sa.method, "is, bl or both")->capture_default_str();
  score->add_flag("--dump-trajectories", sa.dump_trajectories, "Also write trajectory and mode CSVs");

  std::vector<std::string> dq_dirs;
  auto* dq = app.add_subcommand("dq", "Diversity of scenario domains");
  dq->add_option("domains", dq_dirs, "Directories of scenario files")->required();

  RankArgs ra;
  auto* rank = app.add_subcommand("rank", "Rank source-target domain pairs");
  rank->add_option("--source", ra.sources, "Source domain directories")->required();
  rank->add_option("--target", ra.targets, "Target domain directories (scenarios or IS reports)")->required();
  rank->add_flag("--exclude-failed", ra.exclude_failed, "Drop agents that missed their goal");

  PlotArgs pa;
  auto* plot = app.add_subcommand("plot", "Render SVG figures");
  plot->require_subcommand(1);
  auto* pscen = plot->add_subcommand("scenario", "Scenario view with trajectories");
  pscen->add_option("scenario", pa.scenario)->required()->check(CLI::ExistingFile);
  pscen->add_option("--trajectories", pa.trajectories)->check(CLI::ExistingFile);
  pscen->add_option("--modes", pa.modes, "Mode table CSV for coloring")->check(CLI::ExistingFile);
  pscen->add_option("-o,--svg", pa.svg)->required();
  auto* pbox = plot->add_subcommand("box", "Box plots of score reports grouped by label");
  pbox->add_option("reports", pa.reports)->required();
  pbox->add_flag("--per-agent", pa.per_agent, "Box per-agent values instead of scenario means");
  pbox->add_option("-o,--svg", pa.svg)->required();

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try
  {
    if (*gen) return cmd_gen(rc, ga);
    if (*val) return cmd_validate(vfiles);
    if (*score) return cmd_score(rc, sa);
    if (*dq) return cmd_dq(rc, dq_dirs);
    if (*rank) return cmd_rank(rc, ra);
    if (*pscen) return cmd_plot_scenario(pa);
    if (*pbox) return cmd_plot_box(pa);
  }
  catch (const UsageError& e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
