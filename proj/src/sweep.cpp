#include "genlab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "genlab/checkpoint.hpp"
#include "genlab/rng.hpp"
#include "genlab/svg_plot.hpp"

namespace genlab {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kCsvColumns[] = {
    "width",
    "seed",
    "l_orig_train1",
    "l_orig_test",
    "l_aux_train1",
    "l_aux_test",
    "l_ind_match_train1",
    "l_ind_match_train2",
    "l_ind_match_test",
    "l_ind_base_train1",
    "l_ind_base_train2",
    "l_ind_base_test",
    "l_ind_match_train2self",
    "l_ind_base_train2self",
    "generator_gap",
    "generator_gap_se",
    "underfit",
    "frechet_train1",
    "frechet_test",
    "status",
};
constexpr std::size_t kCsvColumnCount = std::size(kCsvColumns);

std::string fmt9(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string csv_line(const SweepRow& r) {
  std::ostringstream os;
  os << r.width << ',' << r.seed << ',' << fmt9(r.l_orig_train1) << ','
     << fmt9(r.l_orig_test) << ',' << fmt9(r.l_aux_train1) << ','
     << fmt9(r.l_aux_test) << ',' << fmt9(r.l_ind_match_train1) << ','
     << fmt9(r.l_ind_match_train2) << ',' << fmt9(r.l_ind_match_test) << ','
     << fmt9(r.l_ind_base_train1) << ',' << fmt9(r.l_ind_base_train2) << ','
     << fmt9(r.l_ind_base_test) << ',' << fmt9(r.l_ind_match_train2self) << ','
     << fmt9(r.l_ind_base_train2self) << ',' << fmt9(r.generator_gap) << ','
     << fmt9(r.generator_gap_se) << ',' << (r.underfit ? 1 : 0) << ','
     << fmt9(r.frechet_train1) << ',' << fmt9(r.frechet_test) << ','
     << (r.ok ? "ok" : "failed");
  return os.str();
}

std::string csv_header() {
  std::string h;
  for (std::size_t i = 0; i < kCsvColumnCount; ++i) {
    if (i) h += ',';
    h += kCsvColumns[i];
  }
  return h;
}

}  // namespace

void SweepSpec::validate() const {
  dataset.validate();
  if (widths.empty()) throw SpecError("sweep: widths must be non-empty");
  for (std::size_t w : widths) discriminator_spec(2, w);  // validity probe
  for (std::size_t i = 0; i < widths.size(); ++i)
    for (std::size_t j = i + 1; j < widths.size(); ++j)
      if (widths[i] == widths[j])
        throw SpecError("sweep: duplicate width " + std::to_string(widths[i]));
  if (seeds.empty()) throw SpecError("sweep: seeds must be non-empty");
  for (std::size_t i = 0; i < seeds.size(); ++i)
    for (std::size_t j = i + 1; j < seeds.size(); ++j)
      if (seeds[i] == seeds[j])
        throw SpecError("sweep: duplicate seed " + std::to_string(seeds[i]));
  discriminator_spec(2, baseline_width);
  if (ind_steps < 0) throw SpecError("sweep: negative independent steps");
  if (ind_batch_size == 0)
    throw SpecError("sweep: independent batch_size must be positive");
  if (!(ind_base_lr >= ind_floor_lr) || !(ind_floor_lr >= 0.0))
    throw SpecError("sweep: need base_lr >= floor_lr >= 0");
  if (embedding.kind == EmbeddingSpec::Kind::RandomProjection &&
      embedding.out_dim == 0)
    throw SpecError("sweep: projection embedding needs out_dim >= 1");
  // Everything the per-cell GAN config checks.
  GanConfig probe;
  probe.dataset = dataset;
  probe.splits = splits;
  probe.latent_dim = latent_dim;
  probe.gen_hidden = gen_hidden;
  probe.disc_width_multiplier = widths.front();
  probe.total_steps = gan_steps;
  probe.batch_size = batch_size;
  probe.adam = adam;
  probe.loss_reduction = loss_reduction;
  probe.auxiliary_enabled = auxiliary;
  probe.eval_every = eval_every;
  probe.gen_eval_count = gen_eval_count;
  probe.validate();
  if (ind_batch_size > splits.n_train1)
    throw SpecError("sweep: independent batch_size exceeds the training split");
}

std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t width,
                        std::uint64_t seed_index) {
  return derive_seed(master_seed, seed_role::sweep_cell,
                     static_cast<std::uint64_t>(width), seed_index);
}

SweepRow run_cell(const SweepSpec& spec, std::size_t width,
                  std::uint64_t seed_index) {
  SweepRow row;
  row.width = width;
  row.seed = seed_index;
  const auto t0 = std::chrono::steady_clock::now();

  std::string cell_dir;
  if (!spec.out_dir.empty()) {
    cell_dir = spec.out_dir + "/cells/w" + std::to_string(width) + "_s" +
               std::to_string(seed_index);
    fs::create_directories(cell_dir);
  }

  try {
    const std::uint64_t cs = cell_seed(spec.master_seed, width, seed_index);

    GanConfig cfg;
    cfg.dataset = spec.dataset;
    cfg.splits = spec.splits;
    cfg.latent_dim = spec.latent_dim;
    cfg.gen_hidden = spec.gen_hidden;
    cfg.disc_width_multiplier = width;
    cfg.total_steps = spec.gan_steps;
    cfg.batch_size = spec.batch_size;
    cfg.adam = spec.adam;
    cfg.loss_reduction = spec.loss_reduction;
    cfg.auxiliary_enabled = spec.auxiliary;
    cfg.eval_every = spec.eval_every;
    cfg.gen_eval_count = spec.gen_eval_count;
    cfg.master_seed = cs;
    cfg.abort_checkpoint_dir = cell_dir;

    TrainedBundle bundle = train_gan(cfg);

    // Shared held-out generator sample set for every reported payoff: the
    // same latents the in-training evaluations used, through the final
    // generator.
    const LatentSampler eval_latents{
        cfg.latent_dim, derive_seed(cs, seed_role::latent_eval)};
    const Matrix gen_eval = generate_samples(
        bundle.generator, eval_latents.sample(cfg.gen_eval_count, 0), false);

    const DivergenceEstimate o_t1 =
        estimate_divergence(bundle.disc_original, bundle.data.train1, gen_eval,
                            DiscRole::Original, EvalSet::Train1);
    const DivergenceEstimate o_te =
        estimate_divergence(bundle.disc_original, bundle.data.test, gen_eval,
                            DiscRole::Original, EvalSet::Test);
    row.l_orig_train1 = o_t1.value;
    row.l_orig_test = o_te.value;
    row.se_orig_train1 = o_t1.standard_error;

    if (bundle.disc_auxiliary) {
      const DivergenceEstimate a_t1 =
          estimate_divergence(*bundle.disc_auxiliary, bundle.data.train1,
                              gen_eval, DiscRole::Auxiliary, EvalSet::Train1);
      const DivergenceEstimate a_te =
          estimate_divergence(*bundle.disc_auxiliary, bundle.data.test,
                              gen_eval, DiscRole::Auxiliary, EvalSet::Test);
      row.l_aux_train1 = a_t1.value;
      row.l_aux_test = a_te.value;
      row.se_aux_train1 = a_t1.standard_error;
      // Statistical slack: twice the combined standard error of the two
      // payoff estimates being compared.
      const double margin =
          2.0 * std::sqrt(o_t1.standard_error * o_t1.standard_error +
                          a_t1.standard_error * a_t1.standard_error);
      row.underfit =
          underfitting_indicator(row.l_orig_train1, row.l_aux_train1, margin);
    }

    const GeneratorSource source(bundle.generator, cfg.latent_dim);
    IndependentDiscConfig ic;
    ic.steps = spec.ind_steps;
    ic.batch_size = spec.ind_batch_size;
    ic.schedule = {spec.ind_base_lr, std::max<long long>(spec.ind_steps, 1),
                   spec.ind_floor_lr};
    ic.loss_reduction = spec.loss_reduction;

    auto run_ind = [&](std::size_t m, TrainSplit split, std::uint64_t salt) {
      IndependentDiscConfig c = ic;
      c.width_multiplier = m;
      c.train_split = split;
      c.seed = derive_seed(cs, seed_role::independent_init, salt);
      return train_independent_discriminator(source, bundle.data, c, gen_eval);
    };
    IndependentResult match_t1 = run_ind(width, TrainSplit::Train1, 1);
    IndependentResult match_t2 = run_ind(width, TrainSplit::Train2, 2);
    IndependentResult base_t1 = run_ind(spec.baseline_width, TrainSplit::Train1, 3);
    IndependentResult base_t2 = run_ind(spec.baseline_width, TrainSplit::Train2, 4);

    row.l_ind_match_train1 = match_t1.on_train1.value;
    row.l_ind_match_train2 = match_t1.on_train2.value;
    row.l_ind_match_test = match_t1.on_test.value;
    row.l_ind_base_train1 = base_t1.on_train1.value;
    row.l_ind_base_train2 = base_t1.on_train2.value;
    row.l_ind_base_test = base_t1.on_test.value;
    row.l_ind_match_train2self = match_t2.on_train2.value;
    row.l_ind_base_train2self = base_t2.on_train2.value;

    // Generator gap through the baseline critic trained on train1.  The
    // generator-side mean is the same term in both payoffs and cancels, so
    // the gap's standard error carries only the real-side components.
    row.generator_gap =
        generator_gap(base_t1.on_train2.value, base_t1.on_train1.value);
    row.generator_gap_se =
        std::sqrt(base_t1.on_train1.se_real * base_t1.on_train1.se_real +
                  base_t1.on_train2.se_real * base_t1.on_train2.se_real);

    row.frechet_train1 =
        frechet_metric(bundle.data.train1, gen_eval, spec.embedding);
    row.frechet_test =
        frechet_metric(bundle.data.test, gen_eval, spec.embedding);

    if (!cell_dir.empty()) {
      const std::string base = cell_dir + "/";
      save_checkpoint(bundle.generator,
                      {"generator", bundle.generator.init_seed, cfg.total_steps},
                      base + "generator.ckpt");
      save_checkpoint(
          bundle.disc_original,
          {"disc_original", bundle.disc_original.init_seed, cfg.total_steps},
          base + "disc_original.ckpt");
      if (bundle.disc_auxiliary)
        save_checkpoint(*bundle.disc_auxiliary,
                        {"disc_auxiliary", bundle.disc_auxiliary->init_seed,
                         cfg.total_steps},
                        base + "disc_auxiliary.ckpt");
      const std::pair<const char*, IndependentResult*> inds[] = {
          {"ind_match_train1", &match_t1},
          {"ind_match_train2", &match_t2},
          {"ind_base_train1", &base_t1},
          {"ind_base_train2", &base_t2},
      };
      for (const auto& [label, res] : inds)
        save_checkpoint(res->critic,
                        {label, res->critic.init_seed, spec.ind_steps},
                        base + label + ".ckpt");

      std::ofstream log(base + "run_log.ndjson");
      log << json{{"event", "cell_start"},
                  {"width", width},
                  {"seed", seed_index},
                  {"cell_seed", cs}}
              .dump()
          << '\n';
      for (const EvalPoint& p : bundle.history.points)
        log << json{{"event", "eval"},
                    {"step", p.step},
                    {"loss_d", p.loss_d},
                    {"loss_g", p.loss_g},
                    {"loss_aux", p.loss_aux},
                    {"l_orig_train1", p.orig_train1.value},
                    {"l_orig_test", p.orig_test.value},
                    {"l_aux_train1", p.aux_train1.value},
                    {"l_aux_test", p.aux_test.value}}
                .dump()
            << '\n';
      row.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      log << json{{"event", "cell_done"},
                  {"wall_seconds", row.wall_seconds},
                  {"gen_updates", bundle.gen_updates},
                  {"disc_updates", bundle.disc_updates},
                  {"aux_updates", bundle.aux_updates}}
              .dump()
          << '\n';
    }
  } catch (const std::exception& e) {
    row.ok = false;
    row.failure = e.what();
    if (!cell_dir.empty()) {
      std::ofstream log(cell_dir + "/run_log.ndjson", std::ios::app);
      log << json{{"event", "cell_failed"}, {"error", row.failure}}.dump()
          << '\n';
    }
  }
  row.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return row;
}

std::vector<SweepRow> run_sweep(
    const SweepSpec& spec, int workers,
    const std::function<void(const SweepRow&)>& on_row) {
  spec.validate();
  struct Cell {
    std::size_t width;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::size_t w : spec.widths)
    for (std::uint64_t s : spec.seeds) cells.push_back({w, s});

  std::vector<SweepRow> rows(cells.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      rows[i] = run_cell(spec, cells[i].width, cells[i].seed);
      if (on_row) on_row(rows[i]);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    auto work = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cells.size()) return;
        SweepRow row = run_cell(spec, cells[i].width, cells[i].seed);
        std::lock_guard<std::mutex> lock(mu);
        rows[i] = std::move(row);
        if (on_row) on_row(rows[i]);
      }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(workers, static_cast<int>(cells.size()));
    pool.reserve(n);
    for (int t = 0; t < n; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }

  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.width != b.width ? a.width < b.width : a.seed < b.seed;
  });
  return rows;
}

void write_rows_csv(const std::vector<SweepRow>& rows,
                    const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ContractError("cannot open " + path + " for writing");
  os << csv_header() << '\n';
  for (const SweepRow& r : rows) os << csv_line(r) << '\n';
  if (!os) throw ContractError("failed writing " + path);
}

std::vector<SweepRow> read_rows_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open rows file " + path);
  std::string line;
  if (!std::getline(is, line) || line != csv_header())
    throw ConfigError(path + ": not a results file (unexpected header)");

  std::vector<SweepRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    fields.push_back(cur);
    if (fields.size() != kCsvColumnCount)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected " + std::to_string(kCsvColumnCount) +
                        " fields, got " + std::to_string(fields.size()));
    auto num = [&](std::size_t i) {
      const std::string& f = fields[i];
      if (f == "nan") return SweepRow::nan;
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (end != f.c_str() + f.size())
        throw ConfigError(path + ":" + std::to_string(lineno) + ": bad number '" +
                          f + "' in column " + kCsvColumns[i]);
      return v;
    };
    SweepRow r;
    r.width = static_cast<std::size_t>(num(0));
    r.seed = static_cast<std::uint64_t>(num(1));
    r.l_orig_train1 = num(2);
    r.l_orig_test = num(3);
    r.l_aux_train1 = num(4);
    r.l_aux_test = num(5);
    r.l_ind_match_train1 = num(6);
    r.l_ind_match_train2 = num(7);
    r.l_ind_match_test = num(8);
    r.l_ind_base_train1 = num(9);
    r.l_ind_base_train2 = num(10);
    r.l_ind_base_test = num(11);
    r.l_ind_match_train2self = num(12);
    r.l_ind_base_train2self = num(13);
    r.generator_gap = num(14);
    r.generator_gap_se = num(15);
    r.underfit = num(16) != 0.0;
    r.frechet_train1 = num(17);
    r.frechet_test = num(18);
    if (fields[19] == "ok") {
      r.ok = true;
    } else if (fields[19] == "failed") {
      r.ok = false;
      r.failure = "failed (from rows file)";
    } else {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": bad status '" + fields[19] + "'");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

ordered_json row_to_json(const SweepRow& r) {
  auto jnum = [](double v) {
    return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
  };
  ordered_json j;
  j["width"] = r.width;
  j["seed"] = r.seed;
  j["l_orig_train1"] = jnum(r.l_orig_train1);
  j["l_orig_test"] = jnum(r.l_orig_test);
  j["l_aux_train1"] = jnum(r.l_aux_train1);
  j["l_aux_test"] = jnum(r.l_aux_test);
  j["l_ind_match_train1"] = jnum(r.l_ind_match_train1);
  j["l_ind_match_train2"] = jnum(r.l_ind_match_train2);
  j["l_ind_match_test"] = jnum(r.l_ind_match_test);
  j["l_ind_base_train1"] = jnum(r.l_ind_base_train1);
  j["l_ind_base_train2"] = jnum(r.l_ind_base_train2);
  j["l_ind_base_test"] = jnum(r.l_ind_base_test);
  j["l_ind_match_train2self"] = jnum(r.l_ind_match_train2self);
  j["l_ind_base_train2self"] = jnum(r.l_ind_base_train2self);
  j["generator_gap"] = jnum(r.generator_gap);
  j["generator_gap_se"] = jnum(r.generator_gap_se);
  j["underfit"] = r.underfit;
  j["frechet_train1"] = jnum(r.frechet_train1);
  j["frechet_test"] = jnum(r.frechet_test);
  j["status"] = r.ok ? "ok" : "failed";
  if (!r.ok) j["failure"] = r.failure;
  return j;
}

}  // namespace

void write_rows_json(const std::vector<SweepRow>& rows,
                     const std::string& path) {
  ordered_json arr = ordered_json::array();
  for (const SweepRow& r : rows) arr.push_back(row_to_json(r));
  std::ofstream os(path);
  if (!os) throw ContractError("cannot open " + path + " for writing");
  os << arr.dump(2) << '\n';
  if (!os) throw ContractError("failed writing " + path);
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
  }
}

double get_double(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number())
    throw ConfigError(std::string("config: '") + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t get_u64(const json& obj, const char* key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned())
    throw ConfigError(std::string("config: '") + key +
                      "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

long long get_ll(const json& obj, const char* key, long long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer())
    throw ConfigError(std::string("config: '") + key + "' must be an integer");
  return v.get<long long>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean())
    throw ConfigError(std::string("config: '") + key + "' must be a boolean");
  return v.get<bool>();
}

std::string get_string(const json& obj, const char* key,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string())
    throw ConfigError(std::string("config: '") + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<std::size_t> get_size_array(const json& obj, const char* key,
                                        std::vector<std::size_t> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array())
    throw ConfigError(std::string("config: '") + key + "' must be an array");
  std::vector<std::size_t> out;
  for (const json& e : v) {
    if (!e.is_number_unsigned())
      throw ConfigError(std::string("config: '") + key +
                        "' entries must be non-negative integers");
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

DistributionSpec parse_dataset(const json& obj) {
  if (!obj.is_object())
    throw ConfigError("config: 'dataset' must be an object");
  const std::string kind = get_string(obj, "kind", "");
  if (kind.empty()) throw ConfigError("config: 'dataset.kind' is required");
  DistributionSpec spec;
  if (kind == "gaussian_ring") {
    check_keys(obj, "dataset", {"kind", "dimension", "components", "radius", "sigma"});
    spec.kind = DistKind::GaussianRing;
    spec.components = static_cast<std::size_t>(get_u64(obj, "components", 8));
    // Desk-scale defaults sized to the generator's tanh output range.
    spec.radius = get_double(obj, "radius", 0.75);
    spec.component_sigma = get_double(obj, "sigma", 0.03);
  } else if (kind == "checkerboard") {
    check_keys(obj, "dataset", {"kind", "dimension", "cells"});
    spec.kind = DistKind::Checkerboard;
    spec.cells = static_cast<std::size_t>(get_u64(obj, "cells", 4));
  } else if (kind == "spiral") {
    check_keys(obj, "dataset", {"kind", "dimension", "arms", "noise"});
    spec.kind = DistKind::Spiral;
    spec.arms = static_cast<std::size_t>(get_u64(obj, "arms", 2));
    spec.noise = get_double(obj, "noise", 0.05);
  } else {
    throw ConfigError("config: unknown dataset kind '" + kind + "'");
  }
  spec.dimension = static_cast<std::size_t>(get_u64(obj, "dimension", 2));
  return spec;
}

}  // namespace

SweepSpec parse_sweep_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  check_keys(j, "config",
             {"master_seed", "out_dir", "dataset", "widths", "seeds",
              "baseline_width", "split", "latent_dim", "gan", "independent",
              "embedding"});
  for (const char* required : {"dataset", "widths", "seeds"})
    if (!j.contains(required))
      throw ConfigError(std::string("config: missing required key '") +
                        required + "'");

  SweepSpec spec;
  spec.dataset = parse_dataset(j.at("dataset"));
  spec.widths = get_size_array(j, "widths", {});
  {
    const json& seeds = j.at("seeds");
    if (!seeds.is_array() || seeds.empty())
      throw ConfigError("config: 'seeds' must be a non-empty array");
    spec.seeds.clear();
    for (const json& e : seeds) {
      if (!e.is_number_unsigned())
        throw ConfigError("config: 'seeds' entries must be non-negative integers");
      spec.seeds.push_back(e.get<std::uint64_t>());
    }
  }
  spec.baseline_width =
      static_cast<std::size_t>(get_u64(j, "baseline_width", spec.baseline_width));
  spec.master_seed = get_u64(j, "master_seed", spec.master_seed);
  spec.out_dir = get_string(j, "out_dir", spec.out_dir);
  spec.latent_dim =
      static_cast<std::size_t>(get_u64(j, "latent_dim", spec.latent_dim));

  if (j.contains("split")) {
    const json& s = j.at("split");
    if (!s.is_object()) throw ConfigError("config: 'split' must be an object");
    check_keys(s, "split", {"n_train1", "n_train2", "n_test"});
    spec.splits.n_train1 =
        static_cast<std::size_t>(get_u64(s, "n_train1", spec.splits.n_train1));
    spec.splits.n_train2 =
        static_cast<std::size_t>(get_u64(s, "n_train2", spec.splits.n_train2));
    spec.splits.n_test =
        static_cast<std::size_t>(get_u64(s, "n_test", spec.splits.n_test));
  }

  if (j.contains("gan")) {
    const json& g = j.at("gan");
    if (!g.is_object()) throw ConfigError("config: 'gan' must be an object");
    check_keys(g, "gan",
               {"total_steps", "batch_size", "lr", "beta1", "beta2", "eps",
                "eval_every", "auxiliary", "loss_reduction", "generator_hidden",
                "generator_eval_samples"});
    spec.gan_steps = get_ll(g, "total_steps", spec.gan_steps);
    spec.batch_size =
        static_cast<std::size_t>(get_u64(g, "batch_size", spec.batch_size));
    spec.adam.lr = get_double(g, "lr", spec.adam.lr);
    spec.adam.beta1 = get_double(g, "beta1", spec.adam.beta1);
    spec.adam.beta2 = get_double(g, "beta2", spec.adam.beta2);
    spec.adam.eps = get_double(g, "eps", spec.adam.eps);
    spec.eval_every = get_ll(g, "eval_every", spec.eval_every);
    spec.auxiliary = get_bool(g, "auxiliary", spec.auxiliary);
    const std::string red = get_string(g, "loss_reduction", "mean");
    if (red == "mean")
      spec.loss_reduction = LossReduction::Mean;
    else if (red == "sum")
      spec.loss_reduction = LossReduction::Sum;
    else
      throw ConfigError("config: 'loss_reduction' must be 'mean' or 'sum'");
    spec.gen_hidden = get_size_array(g, "generator_hidden", spec.gen_hidden);
    spec.gen_eval_count = static_cast<std::size_t>(
        get_u64(g, "generator_eval_samples", spec.gen_eval_count));
  }

  if (j.contains("independent")) {
    const json& ind = j.at("independent");
    if (!ind.is_object())
      throw ConfigError("config: 'independent' must be an object");
    check_keys(ind, "independent", {"steps", "batch_size", "base_lr", "floor_lr"});
    spec.ind_steps = get_ll(ind, "steps", spec.ind_steps);
    spec.ind_batch_size = static_cast<std::size_t>(
        get_u64(ind, "batch_size", spec.ind_batch_size));
    spec.ind_base_lr = get_double(ind, "base_lr", spec.ind_base_lr);
    spec.ind_floor_lr = get_double(ind, "floor_lr", spec.ind_floor_lr);
  }

  if (j.contains("embedding")) {
    const json& e = j.at("embedding");
    if (!e.is_object())
      throw ConfigError("config: 'embedding' must be an object");
    check_keys(e, "embedding", {"kind", "out_dim", "seed"});
    const std::string kind = get_string(e, "kind", "identity");
    if (kind == "identity") {
      spec.embedding.kind = EmbeddingSpec::Kind::Identity;
    } else if (kind == "random_projection") {
      spec.embedding.kind = EmbeddingSpec::Kind::RandomProjection;
    } else {
      throw ConfigError("config: unknown embedding kind '" + kind + "'");
    }
    spec.embedding.out_dim =
        static_cast<std::size_t>(get_u64(e, "out_dim", spec.embedding.out_dim));
    spec.embedding.seed = get_u64(e, "seed", spec.embedding.seed);
  }

  try {
    spec.validate();
  } catch (const SpecError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return spec;
}

SweepSpec load_sweep_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_sweep_config(buf.str());
}

std::string sweep_config_echo(const SweepSpec& spec) {
  ordered_json dataset;
  switch (spec.dataset.kind) {
    case DistKind::GaussianRing:
      dataset = {{"kind", "gaussian_ring"},
                 {"dimension", spec.dataset.dimension},
                 {"components", spec.dataset.components},
                 {"radius", spec.dataset.radius},
                 {"sigma", spec.dataset.component_sigma}};
      break;
    case DistKind::Checkerboard:
      dataset = {{"kind", "checkerboard"},
                 {"dimension", spec.dataset.dimension},
                 {"cells", spec.dataset.cells}};
      break;
    case DistKind::Spiral:
      dataset = {{"kind", "spiral"},
                 {"dimension", spec.dataset.dimension},
                 {"arms", spec.dataset.arms},
                 {"noise", spec.dataset.noise}};
      break;
  }
  ordered_json j{
      {"master_seed", spec.master_seed},
      {"out_dir", spec.out_dir},
      {"dataset", dataset},
      {"widths", spec.widths},
      {"seeds", spec.seeds},
      {"baseline_width", spec.baseline_width},
      {"split",
       {{"n_train1", spec.splits.n_train1},
        {"n_train2", spec.splits.n_train2},
        {"n_test", spec.splits.n_test}}},
      {"latent_dim", spec.latent_dim},
      {"gan",
       {{"total_steps", spec.gan_steps},
        {"batch_size", spec.batch_size},
        {"lr", spec.adam.lr},
        {"beta1", spec.adam.beta1},
        {"beta2", spec.adam.beta2},
        {"eps", spec.adam.eps},
        {"eval_every", spec.eval_every},
        {"auxiliary", spec.auxiliary},
        {"loss_reduction",
         spec.loss_reduction == LossReduction::Mean ? "mean" : "sum"},
        {"generator_hidden", spec.gen_hidden},
        {"generator_eval_samples", spec.gen_eval_count}}},
      {"independent",
       {{"steps", spec.ind_steps},
        {"batch_size", spec.ind_batch_size},
        {"base_lr", spec.ind_base_lr},
        {"floor_lr", spec.ind_floor_lr}}},
      {"embedding",
       {{"kind", spec.embedding.kind == EmbeddingSpec::Kind::Identity
                     ? "identity"
                     : "random_projection"},
        {"out_dim", spec.embedding.out_dim},
        {"seed", spec.embedding.seed}}},
  };
  return j.dump(2) + "\n";
}

ExperimentResult run_experiment(const SweepSpec& spec, int workers,
                                std::ostream& log) {
  spec.validate();
  if (spec.out_dir.empty())
    throw ConfigError("run: out_dir must not be empty");
  fs::create_directories(spec.out_dir);

  {
    std::ofstream echo(spec.out_dir + "/config_echo.json");
    if (!echo) throw ContractError("cannot write config echo");
    echo << sweep_config_echo(spec);
  }

  std::ofstream partial(spec.out_dir + "/results_partial.csv");
  if (!partial) throw ContractError("cannot write partial results");
  partial << csv_header() << '\n' << std::flush;

  const std::size_t total = spec.widths.size() * spec.seeds.size();
  std::size_t done = 0;
  auto on_row = [&](const SweepRow& row) {
    partial << csv_line(row) << '\n' << std::flush;
    ++done;
    log << "[" << done << "/" << total << "] width=" << row.width
        << " seed=" << row.seed << (row.ok ? " ok" : " FAILED") << " ("
        << static_cast<long long>(row.wall_seconds + 0.5) << "s)";
    if (row.ok)
      log << " l_ind_base_train1=" << fmt9(row.l_ind_base_train1)
          << " gap=" << fmt9(row.generator_gap);
    else
      log << " error: " << row.failure;
    log << std::endl;
  };

  ExperimentResult result;
  result.rows = run_sweep(spec, workers, on_row);
  for (const SweepRow& r : result.rows)
    if (!r.ok) ++result.failed_cells;

  write_rows_csv(result.rows, spec.out_dir + "/results.csv");
  write_rows_json(result.rows, spec.out_dir + "/results.json");
  const PlotKind kinds[] = {PlotKind::DivergenceVsWidth, PlotKind::GapVsWidth,
                            PlotKind::FrechetVsDivergence};
  for (PlotKind kind : kinds) {
    const std::string path =
        spec.out_dir + "/" + plot_kind_name(kind) + ".svg";
    try {
      write_svg_plot(result.rows, kind, path);
    } catch (const ContractError& e) {
      log << "plot " << plot_kind_name(kind) << " skipped: " << e.what()
          << std::endl;
    }
  }
  log << "wrote " << spec.out_dir << "/results.csv (" << result.rows.size()
      << " rows, " << result.failed_cells << " failed)" << std::endl;
  return result;
}

}  // namespace genlab
