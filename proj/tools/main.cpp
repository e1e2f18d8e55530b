// infocomp command-line interface.
//
// Exit codes: 0 success (including undefined data outcomes), 1 I/O failure,
// 2 validation failure, 3 numeric divergence.

#include <cstdio>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "infocomp/infocomp.hpp"

namespace fs = std::filesystem;
using namespace infocomp;
using io::json;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string output_dir = ".";
  std::string format = "csv";
};

Globals g;

fs::path out_path(const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : fs::path(g.output_dir) / path;
}

int exit_code(Errc c) {
  switch (c) {
    case Errc::io: return 1;
    case Errc::divergence: return 3;
    default: return 2;
  }
}

// Prints one record as a CSV header + row or as a JSON object.
void print_record(const std::vector<std::pair<std::string, json>>& fields) {
  if (g.format == "json") {
    json j = json::object();
    for (const auto& [k, v] : fields) j[k] = v;
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::string head, row;
  for (const auto& [k, v] : fields) {
    head += (head.empty() ? "" : ",") + k;
    std::string cell = v.is_string() ? v.get<std::string>() : v.is_number() ? io::format_number(v.get<double>()) : v.dump();
    row += (row.empty() ? "" : ",") + cell;
  }
  std::cout << head << "\n" << row << "\n";
}

void print_similarity(const SimilarityValue& s) {
  std::vector<std::pair<std::string, json>> f{{"measure", std::string(measure_name(s.measure))},
                                              {"value", io::number_json(s.defined ? s.value : std::nan(""))},
                                              {"std_err", io::number_json(s.defined ? s.std_err : std::nan(""))},
                                              {"estimator", std::string(estimator_name(s.estimator))}};
  if (!s.defined) f.emplace_back("note", s.note);
  print_record(f);
}

Measure parse_measure(const std::string& m) {
  if (m == "nmi") return Measure::nmi;
  if (m == "vi") return Measure::vi;
  if (m == "cka") return Measure::cka_bc;
  if (m == "mi") return Measure::mi;
  fail(Errc::config, "unknown measure '" + m + "'");
}

// A fingerprint from a fingerprint dir, a posterior-set dir or a label CSV.
Fingerprint load_fingerprint(const fs::path& p, const std::vector<SampleId>* reference = nullptr) {
  if (fs::is_directory(p)) {
    const auto kind = io::kind_of(p);
    Fingerprint f = kind == "fingerprint" ? io::read_fingerprint(p) : fingerprint_gaussian(io::read_posterior_set(p));
    if (reference) detail::require_aligned(*reference, f.sample_ids());
    return f;
  }
  if (io::is_hard_label_csv(p)) return fingerprint_hard(io::read_hard_labels(p, reference));
  return fingerprint_discrete_soft(io::read_soft_memberships(p, reference));
}

DiscreteSoftClustering load_discrete(const fs::path& p, const std::vector<SampleId>* reference = nullptr) {
  require(fs::is_regular_file(p), Errc::config, "--exact expects CSV clusterings, got " + p.string());
  if (io::is_hard_label_csv(p)) return DiscreteSoftClustering::one_hot(io::read_hard_labels(p, reference));
  return io::read_soft_memberships(p, reference);
}

// Subdirectories with a manifest, or the directory itself when it is one artifact.
std::vector<fs::path> artifacts_in(const fs::path& dir) {
  auto list = io::list_artifacts(dir);
  require(!list.empty(), Errc::input, "no posterior sets or fingerprints found in " + dir.string());
  return list;
}

// ------------------------------------------------------------- fingerprint

struct FingerprintArgs {
  std::string input, out, dims = "all", dtype = "f32le";
  std::size_t sample = 1000;
};

int run_fingerprint(const FingerprintArgs& a) {
  PosteriorSet s = io::read_posterior_set(a.input);
  if (a.sample < s.size()) {
    require(a.sample >= 2, Errc::config, "--sample must be >= 2");
    std::vector<std::size_t> idx(s.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(g.seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(a.sample);
    std::sort(idx.begin(), idx.end());
    RowMatrix m(static_cast<Eigen::Index>(a.sample), static_cast<Eigen::Index>(s.dim())), sd(m.rows(), m.cols());
    std::vector<SampleId> ids;
    for (std::size_t r = 0; r < idx.size(); ++r) {
      m.row(static_cast<Eigen::Index>(r)) = s.means().row(static_cast<Eigen::Index>(idx[r]));
      sd.row(static_cast<Eigen::Index>(r)) = s.stddevs().row(static_cast<Eigen::Index>(idx[r]));
      ids.push_back(s.sample_ids()[idx[r]]);
    }
    s = PosteriorSet(std::move(m), std::move(sd), std::move(ids), s.space_id());
  }
  const auto dtype = io::parse_dtype(a.dtype);
  const auto out = out_path(a.out);
  if (a.dims == "all") {
    io::write_fingerprint(fingerprint_gaussian(s), out, dtype);
    std::cout << "wrote " << out.string() << " (n=" << s.size() << ")\n";
    return 0;
  }
  std::vector<std::size_t> dims;
  std::stringstream ss(a.dims);
  for (std::string t; std::getline(ss, t, ',');) {
    try {
      std::size_t used = 0;
      const long v = std::stol(t, &used);
      if (used != t.size() || v < 0) throw std::invalid_argument(t);
      dims.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      fail(Errc::config, "--dims expects 'all' or a comma-separated list of indices, got '" + a.dims + "'");
    }
  }
  for (auto d : dims) require(d < s.dim(), Errc::config, "dimension " + std::to_string(d) + " out of range");
  for (auto d : dims) {
    const auto dir = out / ("dim" + std::to_string(d));
    io::write_fingerprint(fingerprint_gaussian(marginal_channel(s, d)), dir, dtype);
    std::cout << "wrote " << dir.string() << "\n";
  }
  return 0;
}

// ----------------------------------------------------------------- compare

struct CompareArgs {
  std::string a, b, measure = "nmi", estimator = "kt";
  bool exact = false;
};

int run_compare(const CompareArgs& c) {
  const Measure m = parse_measure(c.measure);
  require(c.estimator == "kt", Errc::config, "compare supports --estimator kt; use compare-mc for Monte Carlo");
  if (c.exact) {
    const auto u = load_discrete(c.a);
    const auto v = load_discrete(c.b, &u.sample_ids());
    const auto t = exact_terms(u, v);
    switch (m) {
      case Measure::nmi: print_similarity(detail::nmi_from_terms(t)); break;
      case Measure::vi: print_similarity(detail::vi_from_terms(t)); break;
      case Measure::mi: print_similarity(detail::mi_from_terms(t)); break;
      case Measure::cka_bc: fail(Errc::config, "--exact supports nmi, vi and mi");
    }
    return 0;
  }
  const auto fa = load_fingerprint(c.a);
  const auto fb = load_fingerprint(c.b, &fa.sample_ids());
  switch (m) {
    case Measure::nmi: print_similarity(nmi(fa, fb)); break;
    case Measure::vi: print_similarity(vi(fa, fb)); break;
    case Measure::mi: print_similarity(mutual_info(fa, fb)); break;
    case Measure::cka_bc: print_similarity(cka_bc(fa, fb)); break;
  }
  return 0;
}

struct CompareMcArgs {
  std::string a, b, measure = "nmi", vi_error = "sum";
  std::size_t n_samples = 10000;
  double agg_fraction = 1.0;
};

int run_compare_mc(const CompareMcArgs& c) {
  const Measure m = parse_measure(c.measure);
  const auto u = io::read_posterior_set(c.a);
  const auto v = io::read_posterior_set(c.b);
  detail::require_aligned(u.sample_ids(), v.sample_ids());
  const McConfig cfg{c.n_samples, c.agg_fraction, g.seed};
  const auto t = mc_terms(u, v, cfg);
  const auto mode = c.vi_error == "printed" ? ViErrorMode::as_printed : ViErrorMode::sum_of_squares;
  switch (m) {
    case Measure::nmi: print_similarity(detail::nmi_from_terms(t)); break;
    case Measure::vi: print_similarity(detail::vi_from_terms(t, mode)); break;
    case Measure::mi: print_similarity(detail::mi_from_terms(t)); break;
    case Measure::cka_bc: fail(Errc::config, "cka has no Monte Carlo estimator");
  }
  return 0;
}

// ---------------------------------------------------------------- channels

struct ChannelsArgs {
  std::string ensemble, out, factors, planted, measure = "nmi";
  double threshold = kDefaultThresholdBits, xi = 0.05;
  std::size_t min_samples = 20;
};

std::map<std::string, int> read_planted(const fs::path& p) {
  const auto rows = io::detail::read_csv(p);
  require(!rows.empty() && rows[0].size() == 2, Errc::malformed, p.string() + ": expected header 'channel,group'");
  std::map<std::string, int> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    require(rows[r].size() == 2, Errc::malformed, p.string() + ": expected 'channel,group' rows");
    try {
      out[rows[r][0]] = std::stoi(rows[r][1]);
    } catch (const std::exception&) {
      fail(Errc::malformed, p.string() + ": bad group '" + rows[r][1] + "'");
    }
  }
  return out;
}

int run_channels(const ChannelsArgs& a) {
  const Measure measure = parse_measure(a.measure);
  require(measure == Measure::nmi || measure == Measure::vi, Errc::config, "channels supports nmi and vi");
  require(a.min_samples >= 2, Errc::config, "--min-samples must be >= 2");
  require(a.xi > 0 && a.xi < 1, Errc::config, "--xi must lie in (0, 1)");
  std::vector<PosteriorSet> models;
  for (const auto& p : artifacts_in(a.ensemble)) {
    require(io::kind_of(p) == "posterior_set", Errc::input, p.string() + " is not a posterior set");
    models.push_back(io::read_posterior_set(p));
    if (models.back().space_id().empty()) models.back().set_space_id(p.filename().string());
  }
  const auto out = out_path(a.out);
  io::detail::ensure_dir(out);

  const auto channels = collect_channels(models);
  ChannelReport rep;
  for (const auto& c : channels) rep.all_refs.push_back(c.ref);
  rep.info_bits = channel_information(channels);
  std::vector<Channel> kept;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (rep.info_bits[i] >= a.threshold) {
      rep.kept.push_back(i);
      kept.push_back(channels[i]);
    }
  }

  std::vector<std::vector<std::string>> info_rows;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const bool k = std::find(rep.kept.begin(), rep.kept.end(), i) != rep.kept.end();
    info_rows.push_back({rep.all_refs[i].label(), io::format_number(rep.info_bits[i]), k ? "1" : "0"});
  }
  io::export_table_csv({"channel", "info_bits", "kept"}, info_rows, out / "info.csv");

  std::vector<std::string> kept_labels;
  for (const auto& c : kept) kept_labels.push_back(c.ref.label());

  json report;
  report["n_channels"] = channels.size();
  report["n_kept"] = kept.size();
  report["threshold_bits"] = a.threshold;
  report["min_samples"] = a.min_samples;
  report["xi"] = a.xi;
  report["measure"] = std::string(measure_name(measure));
  report["groups"] = json::array();
  std::string note;

  if (kept.size() >= 2) {
    rep.similarity = pairwise_similarity(kept, measure);
    io::export_matrix_csv(rep.similarity.values, kept_labels, out / "similarity.csv");
    if (kept.size() >= a.min_samples) {
      rep.optics = optics(to_distance_matrix(rep.similarity), a.min_samples, a.xi);
      for (const auto& grp : rep.optics.groups) rep.representatives.push_back(representative(grp.members, rep.similarity));
    } else {
      note = "only " + std::to_string(kept.size()) + " informative channels for min_samples = " +
             std::to_string(a.min_samples) + "; no ordering computed";
    }
  } else {
    note = "fewer than 2 informative channels";
  }
  if (!note.empty()) {
    report["note"] = note;
    std::cerr << "note: " << note << "\n";
  }

  const auto labels = rep.optics.ordering.empty() ? std::vector<int>(kept.size(), -1) : rep.optics.labels();
  if (!rep.optics.ordering.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t p = 0; p < rep.optics.ordering.size(); ++p) {
      const auto i = rep.optics.ordering[p];
      const auto pred = rep.optics.predecessor[p];
      rows.push_back({std::to_string(p), kept_labels[i], io::format_number(rep.optics.reachability[p]),
                      io::format_number(rep.optics.core_distances[p]),
                      pred < 0 ? "" : kept_labels[static_cast<std::size_t>(pred)], std::to_string(labels[i])});
    }
    io::export_table_csv({"position", "channel", "reachability", "core_distance", "predecessor", "group"}, rows,
                         out / "optics.csv");
    for (std::size_t gi = 0; gi < rep.optics.groups.size(); ++gi) {
      json grp;
      grp["id"] = gi;
      grp["begin"] = rep.optics.groups[gi].begin;
      grp["end"] = rep.optics.groups[gi].end;
      grp["members"] = json::array();
      for (auto m : rep.optics.groups[gi].members) grp["members"].push_back(kept_labels[m]);
      grp["representative"] = kept_labels[rep.representatives[gi]];
      report["groups"].push_back(grp);
    }
  }

  if (!a.factors.empty() && !kept.empty()) {
    const auto factors = io::read_label_table(a.factors, &models.front().sample_ids());
    std::vector<std::string> header{"channel"};
    std::vector<std::vector<double>> cols;
    for (const auto& [name, f] : factors) {
      header.push_back(name);
      cols.push_back(factor_info_column(kept, f, measure));
    }
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      std::vector<std::string> r{kept_labels[i]};
      for (const auto& c : cols) r.push_back(io::format_number(c[i]));
      rows.push_back(r);
    }
    io::export_table_csv(header, rows, out / "factors.csv");
  }

  if (!a.planted.empty() && !kept.empty()) {
    const auto planted = read_planted(a.planted);
    std::vector<int> truth;
    for (const auto& l : kept_labels) {
      auto it = planted.find(l);
      require(it != planted.end(), Errc::missing_id, "channel " + l + " missing from " + a.planted);
      truth.push_back(it->second);
    }
    report["group_agreement"] = group_agreement(labels, truth);
  }

  io::export_json(report, out / "report.json");
  std::cout << "channels=" << channels.size() << " kept=" << kept.size() << " groups=" << report["groups"].size();
  if (report.contains("group_agreement")) std::cout << " group_agreement=" << report["group_agreement"].get<double>();
  std::cout << "\n";
  return 0;
}

// -------------------------------------------------------------------- fuse

struct FuseArgs {
  std::string ensemble, out, objective = "nmi";
  double lr = 3.0;
  std::size_t steps = 20000, latent_dim = 2;
};

int run_fuse(const FuseArgs& a) {
  FusionConfig cfg;
  if (a.objective == "nmi") cfg.objective = FusionObjective::avg_nmi;
  else if (a.objective == "exp-neg-vi") cfg.objective = FusionObjective::avg_exp_neg_vi;
  else if (a.objective == "mi") cfg.objective = FusionObjective::avg_mi;
  else fail(Errc::config, "unknown objective '" + a.objective + "'");
  cfg.learning_rate = a.lr;
  cfg.steps = a.steps;
  cfg.latent_dim = a.latent_dim;
  cfg.seed = g.seed;
  cfg.validate();

  std::vector<Fingerprint> ensemble;
  for (const auto& p : artifacts_in(a.ensemble)) ensemble.push_back(load_fingerprint(p));
  const auto r = fuse(ensemble, cfg);

  const auto out = out_path(a.out);
  io::write_posterior_set(r.space, out / "fused", {{"objective", std::string(objective_name(cfg.objective))}});
  std::vector<std::vector<std::string>> rows;
  for (std::size_t t = 0; t < r.state.objective_trace.size(); ++t)
    rows.push_back({std::to_string(t), io::format_number(r.state.objective_trace[t])});
  io::export_table_csv({"step", "objective"}, rows, out / "trace.csv");

  const double overlap = mean_off_diagonal(fingerprint_gaussian(r.space));
  json report{{"objective", std::string(objective_name(cfg.objective))},
              {"members", ensemble.size()},
              {"n", r.space.size()},
              {"latent_dim", cfg.latent_dim},
              {"learning_rate", cfg.learning_rate},
              {"steps", cfg.steps},
              {"seed", g.seed},
              {"initial_objective", io::number_json(r.state.objective_trace.front())},
              {"final_objective", io::number_json(r.state.objective_trace.back())},
              {"mean_off_diagonal_bc", overlap},
              {"scattered", overlap < 0.05}};
  io::export_json(report, out / "report.json");
  std::cout << "objective=" << objective_name(cfg.objective) << " final=" << r.state.objective_trace.back()
            << " mean_off_diagonal_bc=" << overlap << (overlap < 0.05 ? " (scattered: posteriors no longer overlap)" : "")
            << "\n";
  return 0;
}

// ------------------------------------------------------------------- synth

struct SynthArgs {
  std::string kind, out;
  std::size_t n = 0, k = 4, members = 1, groups = 5, models = 50, dims = 10, informative = 5;
  double noise = -1.0;
};

void write_so2_order(const So2Learner& l, const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < l.angles.size(); ++i)
    rows.push_back({l.space.sample_ids()[i], io::format_number(l.angles[i])});
  io::export_table_csv({"sample_id", "angle"}, rows, path);
}

int run_synth(const SynthArgs& a) {
  const auto out = out_path(a.out);
  io::detail::ensure_dir(out);
  if (a.kind == "nine") {
    for (const auto& s : gen_nine_space_suite(a.n ? a.n : 64, g.seed))
      io::write_posterior_set(s.space, out / ("space_" + s.label));
    std::cout << "wrote 9 posterior sets to " << out.string() << "\n";
  } else if (a.kind == "so2") {
    const double noise = a.noise > 0 ? a.noise : 0.1;
    for (std::size_t m = 0; m < a.members; ++m) {
      const auto l = gen_so2_weak(a.n ? a.n : 200, g.seed + m, noise);
      char name[32];
      std::snprintf(name, sizeof name, "learner_%03zu", m);
      io::write_posterior_set(l.space, out / name, {{"cut", l.cut}, {"orientation", l.orientation}});
      if (m == 0) write_so2_order(l, out / "order.csv");
    }
    std::cout << "wrote " << a.members << " so2 learner(s) to " << out.string() << "\n";
  } else if (a.kind == "planted") {
    PlantedConfig c;
    c.n_points = a.n ? a.n : 1000;
    c.groups = a.groups;
    c.models = a.models;
    c.dims = a.dims;
    c.informative_per_model = a.informative;
    if (a.noise >= 0) c.noise = a.noise;
    c.seed = g.seed;
    const auto e = gen_planted_channels(c);
    std::vector<std::vector<std::string>> planted;
    for (std::size_t m = 0; m < e.models.size(); ++m) {
      io::write_posterior_set(e.models[m], out / "models" / e.models[m].space_id());
      for (std::size_t k = 0; k < c.dims; ++k)
        planted.push_back({ChannelRef{e.models[m].space_id(), k}.label(), std::to_string(e.planted[m * c.dims + k])});
    }
    io::export_table_csv({"channel", "group"}, planted, out / "planted.csv");
    // factors binned into 8 equal-width levels
    std::vector<std::string> header{"sample_id"};
    for (std::size_t f = 0; f < c.groups; ++f) header.push_back("factor" + std::to_string(f));
    std::vector<std::vector<std::string>> rows;
    for (Eigen::Index i = 0; i < e.factors.rows(); ++i) {
      std::vector<std::string> r{e.models.front().sample_ids()[static_cast<std::size_t>(i)]};
      for (Eigen::Index f = 0; f < e.factors.cols(); ++f)
        r.push_back(std::to_string(std::min(7, static_cast<int>((e.factors(i, f) + 1.0) * 4.0))));
      rows.push_back(r);
    }
    io::export_table_csv(header, rows, out / "factors.csv");
    std::cout << "wrote " << e.models.size() << " models to " << (out / "models").string() << "\n";
  } else if (a.kind == "separated") {
    const auto s = gen_separated_gaussians(a.k, a.n ? a.n : 8 * a.k);
    io::write_posterior_set(s.space, out / "separated");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < s.labels.size(); ++i)
      rows.push_back({s.labels.sample_ids()[i], std::to_string(s.labels.labels()[i])});
    io::export_table_csv({"sample_id", "label"}, rows, out / "labels.csv");
    std::cout << "wrote separated suite (k=" << a.k << ") to " << out.string() << "\n";
  } else {
    fail(Errc::config, "unknown kind '" + a.kind + "'");
  }
  return 0;
}

// -------------------------------------------------------------- continuity

int run_continuity(const std::string& input, const std::string& order_csv) {
  const auto s = io::read_posterior_set(input);
  const auto rows = io::detail::read_csv(order_csv);
  require(rows.size() >= 2 && rows[0].size() == 2 && rows[0][0] == "sample_id" &&
              (rows[0][1] == "angle" || rows[0][1] == "data_dist"),
          Errc::malformed, order_csv + ": expected header 'sample_id,angle' or 'sample_id,data_dist'");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < s.size(); ++i) index[s.sample_ids()[i]] = i;
  std::vector<std::size_t> order;
  std::vector<double> col;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto it = index.find(rows[r][0]);
    require(it != index.end(), Errc::missing_id, "sample_id '" + rows[r][0] + "' not in the posterior set");
    order.push_back(it->second);
    col.push_back(std::stod(rows[r][1]));
  }
  std::vector<double> dist;
  if (rows[0][1] == "angle") {
    std::vector<double> angles(s.size());
    for (std::size_t i = 0; i < order.size(); ++i) angles[order[i]] = col[i];
    dist = chord_distances(angles, order);
  } else {
    dist = col;
  }
  const auto r = continuity(s, order, dist);
  print_record({{"continuity_ratio", io::number_json(r.ratio)},
                {"infinite", r.infinite},
                {"p90", io::number_json(percentile90(r.ratios))}});
  return 0;
}

// -------------------------------------------------------------------- info

struct InfoArgs {
  std::string input;
  bool mc = false;
  std::size_t n_samples = 10000;
  double agg_fraction = 1.0;
};

int run_info(const InfoArgs& a) {
  const fs::path p(a.input);
  std::optional<PosteriorSet> set;
  Fingerprint f;
  if (fs::is_directory(p) && io::kind_of(p) == "posterior_set") {
    set = io::read_posterior_set(p);
    f = fingerprint_gaussian(*set);
  } else {
    f = load_fingerprint(p);
  }
  const auto kt = info_kt(f);
  const double cap = entropy_dataset(f.size());
  std::vector<std::pair<std::string, json>> fields{{"n", f.size()},
                                                   {"kt_bits", io::number_json(kt.bits)},
                                                   {"log2_n", io::number_json(cap)}};
  if (a.mc) {
    require(set.has_value(), Errc::config, "--mc needs a posterior set");
    const auto mc = info_mc(*set, {a.n_samples, a.agg_fraction, g.seed});
    fields.emplace_back("mc_bits", io::number_json(mc.bits));
    fields.emplace_back("mc_std_err", io::number_json(mc.std_err));
    fields.emplace_back("within_3_std_err", std::abs(mc.bits - kt.bits) <= 3 * mc.std_err);
  }
  print_record(fields);
  if (cap - kt.bits < 0.1) {
    std::cerr << "warning: kt estimate is within 0.1 bits of log2(N) = " << cap
              << "; it saturates at the fingerprint size, so use a larger sample or the Monte Carlo route\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Information-theoretic comparison of representation spaces"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (default: INFOCOMP_THREADS or 1)")->check(CLI::PositiveNumber);
  app.add_option("--output-dir", g.output_dir, "Base directory for relative output paths")->capture_default_str();
  app.add_option("--format", g.format, "Printed output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  std::function<int()> action;

  FingerprintArgs fa;
  auto* fp = app.add_subcommand("fingerprint", "Bhattacharyya fingerprint of a posterior set");
  fp->add_option("--input", fa.input, "Posterior-set directory")->required()->check(CLI::ExistingDirectory);
  fp->add_option("--out", fa.out, "Output directory")->required();
  fp->add_option("--dims", fa.dims, "'all' for the full space or comma-separated channel indices")->capture_default_str();
  fp->add_option("--sample", fa.sample, "Fingerprint at most this many points (random subset)")->capture_default_str();
  fp->add_option("--dtype", fa.dtype, "Payload type")->check(CLI::IsMember({"f32le", "f64le"}))->capture_default_str();
  fp->callback([&] { action = [&] { return run_fingerprint(fa); }; });

  CompareArgs ca;
  auto* cmp = app.add_subcommand("compare", "Compare two spaces through their fingerprints");
  cmp->add_option("--a", ca.a, "Fingerprint, posterior set or clustering CSV")->required()->check(CLI::ExistingPath);
  cmp->add_option("--b", ca.b, "Fingerprint, posterior set or clustering CSV")->required()->check(CLI::ExistingPath);
  cmp->add_option("--measure", ca.measure)->check(CLI::IsMember({"nmi", "vi", "cka", "mi"}))->capture_default_str();
  cmp->add_option("--estimator", ca.estimator)->check(CLI::IsMember({"kt"}))->capture_default_str();
  cmp->add_flag("--exact", ca.exact, "Exact values for discrete clusterings given as CSV");
  cmp->callback([&] { action = [&] { return run_compare(ca); }; });

  CompareMcArgs ma;
  auto* mc = app.add_subcommand("compare-mc", "Monte Carlo comparison of two posterior sets");
  mc->add_option("--a", ma.a, "Posterior-set directory")->required()->check(CLI::ExistingDirectory);
  mc->add_option("--b", ma.b, "Posterior-set directory")->required()->check(CLI::ExistingDirectory);
  mc->add_option("--measure", ma.measure)->check(CLI::IsMember({"nmi", "vi", "mi"}))->capture_default_str();
  mc->add_option("--n-samples", ma.n_samples)->check(CLI::PositiveNumber)->capture_default_str();
  mc->add_option("--agg-fraction", ma.agg_fraction)->check(CLI::Range(1e-9, 1.0))->capture_default_str();
  mc->add_option("--vi-error", ma.vi_error, "VI error propagation")->check(CLI::IsMember({"sum", "printed"}))
      ->capture_default_str();
  mc->callback([&] { action = [&] { return run_compare_mc(ma); }; });

  ChannelsArgs cha;
  auto* ch = app.add_subcommand("channels", "Group the latent channels of an ensemble");
  ch->add_option("--ensemble", cha.ensemble, "Directory of posterior sets")->required()->check(CLI::ExistingDirectory);
  ch->add_option("--out", cha.out, "Output directory")->required();
  ch->add_option("--threshold-bits", cha.threshold)->check(CLI::NonNegativeNumber)->capture_default_str();
  ch->add_option("--min-samples", cha.min_samples)->capture_default_str();
  ch->add_option("--xi", cha.xi)->capture_default_str();
  ch->add_option("--measure", cha.measure)->check(CLI::IsMember({"nmi", "vi"}))->capture_default_str();
  ch->add_option("--factors", cha.factors, "CSV of ground-truth factor labels")->check(CLI::ExistingFile);
  ch->add_option("--planted", cha.planted, "CSV 'channel,group' to score recovery")->check(CLI::ExistingFile);
  ch->callback([&] { action = [&] { return run_channels(cha); }; });

  FuseArgs fu;
  auto* fs_ = app.add_subcommand("fuse", "Fuse an ensemble of fingerprints into one space");
  fs_->add_option("--ensemble", fu.ensemble, "Directory of fingerprints or posterior sets")->required()
      ->check(CLI::ExistingDirectory);
  fs_->add_option("--out", fu.out, "Output directory")->required();
  fs_->add_option("--objective", fu.objective)->check(CLI::IsMember({"nmi", "exp-neg-vi", "mi"}))->capture_default_str();
  fs_->add_option("--lr", fu.lr)->capture_default_str();
  fs_->add_option("--steps", fu.steps)->capture_default_str();
  fs_->add_option("--latent-dim", fu.latent_dim)->capture_default_str();
  fs_->callback([&] { action = [&] { return run_fuse(fu); }; });

  SynthArgs sa;
  auto* sy = app.add_subcommand("synth", "Write synthetic posterior sets");
  sy->add_option("--kind", sa.kind)->required()->check(CLI::IsMember({"nine", "so2", "planted", "separated"}));
  sy->add_option("--out", sa.out, "Output directory")->required();
  sy->add_option("--n", sa.n, "Number of points (kind default when omitted)");
  sy->add_option("--k", sa.k, "Clusters (separated)")->capture_default_str();
  sy->add_option("--members", sa.members, "Learners (so2)")->capture_default_str();
  sy->add_option("--noise", sa.noise, "Noise scale (so2, planted)");
  sy->add_option("--groups", sa.groups)->capture_default_str();
  sy->add_option("--models", sa.models)->capture_default_str();
  sy->add_option("--dims", sa.dims)->capture_default_str();
  sy->add_option("--informative", sa.informative)->capture_default_str();
  sy->callback([&] { action = [&] { return run_synth(sa); }; });

  std::string cont_input, cont_order;
  auto* co = app.add_subcommand("continuity", "Continuity ratio along a cyclic order");
  co->add_option("--input", cont_input, "Posterior-set directory")->required()->check(CLI::ExistingDirectory);
  co->add_option("--order", cont_order, "CSV 'sample_id,angle' or 'sample_id,data_dist'")->required()
      ->check(CLI::ExistingFile);
  co->callback([&] { action = [&] { return run_continuity(cont_input, cont_order); }; });

  InfoArgs ia;
  auto* inf = app.add_subcommand("info", "Information of a space about the data");
  inf->add_option("--input", ia.input, "Fingerprint, posterior set or clustering CSV")->required()
      ->check(CLI::ExistingPath);
  inf->add_flag("--mc", ia.mc, "Also run the Monte Carlo estimator");
  inf->add_option("--n-samples", ia.n_samples)->check(CLI::PositiveNumber)->capture_default_str();
  inf->add_option("--agg-fraction", ia.agg_fraction)->check(CLI::Range(1e-9, 1.0))->capture_default_str();
  inf->callback([&] { action = [&] { return run_info(ia); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  set_thread_count(g.threads > 0 ? g.threads : thread_count());
  try {
    return action();
  } catch (const Error& e) {
    std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
