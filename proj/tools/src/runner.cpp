#include "runner.hpp"

#include "qmap/concat.hpp"
#include "qmap/cptp_map.hpp"
#include "qmap/error.hpp"
#include "qmap/lindblad.hpp"
#include "qmap/model.hpp"
#include "qmap/thermo.hpp"
#include "qmap/trajectories.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace qmap::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string number(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

class Writer {
public:
    Writer(fs::path dir, std::string hash, RunOutcome& outcome)
        : dir_(std::move(dir)), hash_(std::move(hash)), outcome_(outcome) {}

    const fs::path& dir() const { return dir_; }

    void csv(const std::string& file, const std::vector<std::string>& header,
             const std::vector<std::vector<double>>& rows) {
        std::ostringstream os;
        os << "# config_hash=" << hash_ << "\n";
        for (std::size_t k = 0; k < header.size(); ++k) {
            os << (k ? "," : "") << header[k];
        }
        os << "\n";
        for (const auto& row : rows) {
            for (std::size_t k = 0; k < row.size(); ++k) {
                os << (k ? "," : "") << number(row[k]);
            }
            os << "\n";
        }
        write(file, os.str());
    }

    void distribution(const std::string& file, const Distribution& d) {
        std::vector<std::vector<double>> rows;
        for (const auto& a : d.atoms()) {
            rows.push_back({a.value, a.prob});
        }
        csv(file, {"value", "probability"}, rows);
    }

    void trajectories(const std::string& file, const Ensemble& ens) {
        std::ostringstream os;
        for (const auto& r : ens.records) {
            json line;
            line["n"] = r.n;
            json tr = json::array();
            for (const auto& [i, j] : r.transitions) {
                tr.push_back({i, j});
            }
            line["transitions"] = tr;
            line["m"] = r.m;
            line["p"] = r.p;
            line["de"] = r.de;
            line["q"] = r.q;
            line["w"] = r.w;
            line["ds"] = r.ds;
            line["dsi"] = r.dsi;
            os << line.dump() << "\n";
        }
        write(file, os.str());
    }

    void write(const std::string& file, const std::string& text) {
        const fs::path path = dir_ / file;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out || !(out << text) || !out.flush()) {
            throw OutputError("cannot write " + path.string());
        }
        outcome_.files.push_back(path);
    }

private:
    fs::path dir_;
    std::string hash_;
    RunOutcome& outcome_;
};

struct VariantReport {
    std::string name;
    json report = json::object();
    std::vector<Check> checks;

    void below(const std::string& check, double value, double tol) {
        checks.push_back({check, value, tol, "<", value < tol});
    }
    void above(const std::string& check, double value, double tol) {
        checks.push_back({check, value, tol, ">", value > tol});
    }
    void at_least(const std::string& check, double value, double tol) {
        checks.push_back({check, value, tol, ">=", value >= tol});
    }
};

struct Context {
    const ScenarioConfig& cfg;
    const Variant& variant;
    Writer& out;
    std::mt19937_64& rng;

    double tol(const std::string& key) const { return cfg.run.tol(key); }
};

ComplexMatrix system_hamiltonian(const ModelConfig& m) {
    m.chain.validate();
    return build_chain(m.chain);
}

ComplexMatrix bath_hamiltonian(const ModelConfig& m) { return build_bath({m.bath_h, m.beta}); }

MapSpec make_spec(const ModelConfig& m, const CouplingSpec& c) {
    return MapSpec(system_hamiltonian(m), bath_hamiltonian(m), build_coupling(c, m.chain.sites), c.tau, m.beta);
}

/// H0 is offered as a conserved-quantity candidate when the chain and bath
/// fields agree.
std::optional<ComplexMatrix> h0_candidate(const ModelConfig& m) {
    if (m.bath_h != m.chain.h) {
        return std::nullopt;
    }
    return build_h0(m.chain);
}

DensityMatrix initial_state(const Context& ctx) {
    const ModelConfig& m = ctx.variant.model;
    switch (ctx.cfg.run.initial) {
    case InitialState::Gibbs:
        return gibbs_state(system_hamiltonian(m), m.beta);
    case InitialState::GibbsH0:
        return gibbs_state(build_h0(m.chain), m.beta);
    case InitialState::MaximallyMixed:
        return DensityMatrix::maximally_mixed(Eigen::Index{1} << m.chain.sites);
    case InitialState::Random:
        return random_density(Eigen::Index{1} << m.chain.sites, ctx.rng);
    }
    throw ContractError("unknown initial state");
}

std::vector<double> row(int step, const ThermoRecord& r) {
    return {static_cast<double>(step), r.dE, r.Q, r.W, r.dS, r.dSi};
}

const std::vector<std::string> kThermoHeader{"step", "dE", "Q", "W", "dS", "dSi"};

json to_json(const ThermoRecord& r) {
    return json{{"dE", r.dE}, {"Q", r.Q}, {"W", r.W}, {"dS", r.dS}, {"dSi", r.dSi}};
}

void law_checks(VariantReport& rep, const Context& ctx, const std::vector<ThermoRecord>& records, double beta) {
    double first = 0.0;
    double balance = 0.0;
    double min_dsi = records.empty() ? 0.0 : records.front().dSi;
    for (const auto& r : records) {
        first = std::max(first, std::abs(r.dE - r.W - r.Q));
        balance = std::max(balance, std::abs(r.dSi - (r.dS - beta * r.Q)));
        min_dsi = std::min(min_dsi, r.dSi);
    }
    rep.below("first_law", first, ctx.tol("first_law"));
    rep.below("entropy_balance", balance, ctx.tol("balance"));
    rep.at_least("entropy_production_nonnegative", min_dsi, -ctx.tol("positivity"));
}

void kraus_checks(VariantReport& rep, const Context& ctx, const MapSpec& spec, const KrausSet& k,
                  const DensityMatrix& rho, const std::string& prefix = "") {
    rep.below(prefix + "kraus_completeness", completeness_residual(k), ctx.tol("kraus"));
    const ComplexMatrix via_kraus = apply_kraus(k, rho.matrix());
    const ComplexMatrix via_dilation = apply_total(spec, rho).system.matrix();
    rep.below(prefix + "kraus_dilation_equivalence", inf_norm(via_kraus - via_dilation), ctx.tol("kraus"));
}

MapClassification classify(const MapSpec& spec, const KrausSet& k, const ModelConfig& m, std::uint64_t seed) {
    const DensityMatrix pi = attractive_invariant_state(k, seed);
    return classify_map(spec, pi, h0_candidate(m));
}

void classification_checks(VariantReport& rep, const Context& ctx, const MapClassification& c,
                           const std::string& prefix = "") {
    rep.report[prefix + "class"] = std::string(to_string(c.kind));
    rep.report[prefix + "invariant_entropy_production"] = c.entropy_production;
    rep.report[prefix + "thermal_residual"] = c.thermal_residual;
    if (c.candidate_residual) {
        rep.report[prefix + "certificate_residual"] = *c.candidate_residual;
    }
    if (c.kind != MapKind::Ness) {
        rep.below(prefix + "invariant_entropy_production", c.entropy_production, ctx.tol("class"));
    }
}

bool diagonal_in_energy_basis(const ComplexMatrix& h, const DensityMatrix& rho) {
    return inf_norm(commutator(h, rho.matrix())) < 1e-12;
}

void ensemble_outputs(VariantReport& rep, const Context& ctx, const Ensemble& ens) {
    ctx.out.distribution("p_w.csv", distribution_of(ens, Quantity::Work));
    ctx.out.distribution("p_q.csv", distribution_of(ens, Quantity::Heat));
    ctx.out.distribution("p_dsi.csv", distribution_of(ens, Quantity::EntropyProduction));
    ctx.out.trajectories("trajectories.jsonl", ens);
    rep.report["trajectories"] = ens.records.size();
    rep.below("trajectory_probability_total", std::abs(ens.total_probability() - 1.0), ctx.tol("trace"));
    rep.below("integral_ft", std::abs(integral_ft(ens) - 1.0), ctx.tol("ft"));
}

void detailed_ft(VariantReport& rep, const Context& ctx, const std::vector<MapSpec>& steps,
                 const MeasurementBasis& energy, const Ensemble& fwd) {
    const TimeReversal sys = TimeReversal::spin(ctx.variant.model.chain.sites);
    const TimeReversal bath = TimeReversal::spin(1);
    double symmetry = 0.0;
    for (const auto& s : steps) {
        symmetry = std::max(symmetry, time_symmetry_residual(s, sys, bath));
    }
    rep.report["time_symmetry_residual"] = symmetry;
    if (symmetry >= kCertificateTol) {
        return;
    }
    const Ensemble bwd = backward_ensemble(steps, energy, energy, fwd, sys, bath, std::nullopt, ctx.cfg.run.budget);
    rep.below("detailed_ft", detailed_ft_check(fwd, bwd), ctx.tol("ft"));
}

// --- single_map -----------------------------------------------------------

VariantReport run_single(const Context& ctx) {
    VariantReport rep;
    const ModelConfig& m = ctx.variant.model;
    const MapSpec spec = make_spec(m, *m.coupling);
    const KrausSet k = kraus_from_dilation(spec);
    const DensityMatrix rho = initial_state(ctx);

    kraus_checks(rep, ctx, spec, k, rho);
    const ThermoRecord rec = process_averages(spec, rho);
    ctx.out.csv("thermo.csv", kThermoHeader, {row(1, rec)});
    rep.report["averages"] = to_json(rec);
    law_checks(rep, ctx, {rec}, m.beta);

    const MapClassification c = classify(spec, k, m, ctx.cfg.seed);
    classification_checks(rep, ctx, c);

    const MeasurementBasis energy = measurement_basis(spec.system_hamiltonian(), "energy");
    const Ensemble ens = enumerate(spec, energy, energy, rho);
    ensemble_outputs(rep, ctx, ens);
    if (diagonal_in_energy_basis(spec.system_hamiltonian(), rho)) {
        rep.below("mean_work", std::abs(ens.mean(&TrajectoryRecord::w) - rec.W), ctx.tol("mean"));
        rep.below("mean_heat", std::abs(ens.mean(&TrajectoryRecord::q) - rec.Q), ctx.tol("mean"));
    }
    detailed_ft(rep, ctx, {spec}, energy, ens);

    if (c.kind == MapKind::Thermal) {
        double worst = 0.0;
        for (const auto& r : ens.records) {
            if (r.p > 1e-12) {
                worst = std::max(worst, std::abs(r.w));
            }
        }
        rep.below("thermal_sharpness", worst, ctx.tol("sharpness"));
    }
    if (c.certificate) {
        const ThermoRecord local = equilibrium_averages(spec, *c.certificate, rho);
        const double gap = std::max({std::abs(local.Q - rec.Q), std::abs(local.W - rec.W),
                                     std::abs(local.dSi - rec.dSi)});
        rep.below("equilibrium_locality", gap, ctx.tol("locality"));
        if (inf_norm(commutator(*c.certificate, spec.system_hamiltonian())) < 1e-10) {
            const Distribution local_w = equilibrium_work_distribution(spec, *c.certificate, rho);
            const DistributionDiff d = compare(local_w, distribution_of(ens, Quantity::Work), ctx.tol("atom"));
            rep.below("equilibrium_work_distribution", std::max(d.max_prob_gap, d.max_value_gap), ctx.tol("atom"));
        }
    }
    return rep;
}

// --- sequence -------------------------------------------------------------

std::vector<SequenceEntry> sequence_entries(const Context& ctx) {
    if (ctx.cfg.sequence) {
        return *ctx.cfg.sequence;
    }
    return {{*ctx.variant.model.coupling, ctx.cfg.run.repeats}};
}

double estimated_records(const std::vector<KrausSet>& chain, const MeasurementBasis& energy) {
    double n = static_cast<double>(energy.outcomes.size()) * static_cast<double>(energy.outcomes.size());
    for (const auto& k : chain) {
        n *= static_cast<double>(k.ops.size());
    }
    return n;
}

VariantReport run_sequence_kind(const Context& ctx) {
    VariantReport rep;
    const ModelConfig& m = ctx.variant.model;
    MapSequence seq;
    std::vector<CouplingSpec> distinct;
    for (const auto& e : sequence_entries(ctx)) {
        if (e.repeat == 0) {
            continue;
        }
        seq.append(make_spec(m, e.coupling), e.repeat);
        const bool seen = std::any_of(distinct.begin(), distinct.end(), [&](const CouplingSpec& c) {
            return c.jx_c == e.coupling.jx_c && c.jy_c == e.coupling.jy_c && c.site == e.coupling.site &&
                   c.tau == e.coupling.tau;
        });
        if (!seen) {
            distinct.push_back(e.coupling);
        }
    }
    rep.report["steps"] = seq.size();
    if (seq.empty()) {
        ctx.out.csv("thermo.csv", kThermoHeader, {});
        ctx.out.csv("cumulative.csv", kThermoHeader, {});
        return rep;
    }

    const DensityMatrix rho0 = initial_state(ctx);
    const std::vector<SequenceStep> steps = run_sequence(seq, rho0);
    std::vector<std::vector<double>> per_step;
    std::vector<std::vector<double>> cumulative;
    std::vector<ThermoRecord> records;
    for (std::size_t s = 0; s < steps.size(); ++s) {
        per_step.push_back(row(static_cast<int>(s + 1), steps[s].step));
        cumulative.push_back(row(static_cast<int>(s + 1), steps[s].cumulative));
        records.push_back(steps[s].step);
    }
    ctx.out.csv("thermo.csv", kThermoHeader, per_step);
    ctx.out.csv("cumulative.csv", kThermoHeader, cumulative);
    const ThermoRecord& total = steps.back().cumulative;
    rep.report["cumulative"] = to_json(total);
    law_checks(rep, ctx, records, m.beta);

    const std::vector<KrausSet> chain = seq.kraus_chain();
    for (std::size_t s = 0; s < distinct.size(); ++s) {
        const MapSpec spec = make_spec(m, distinct[s]);
        kraus_checks(rep, ctx, spec, kraus_from_dilation(spec), rho0,
                     distinct.size() > 1 ? "map" + std::to_string(s + 1) + "_" : "");
    }

    if (distinct.size() == 1) {
        const MapSpec& spec = seq.steps().front();
        const MapClassification c = classify(spec, chain.front(), m, ctx.cfg.seed);
        classification_checks(rep, ctx, c);
        if (c.kind == MapKind::EquilibriumNonThermal && c.certificate) {
            const ComplexMatrix& h0 = *c.certificate;
            const DensityMatrix omega0 = gibbs_state(h0, m.beta);
            const ComplexMatrix h_int = spec.system_hamiltonian() - h0;
            const double w_inf = -(h_int * rho0.matrix()).trace().real();
            const double q_inf = (h0 * (omega0.matrix() - rho0.matrix())).trace().real();
            const double s_inf = gibbs_relative_entropy(rho0, h0, m.beta);
            rep.report["asymptote"] = json{{"W", w_inf}, {"Q", q_inf}, {"dSi", s_inf}};
            rep.below("asymptote_work", std::abs(total.W - w_inf), ctx.tol("asymptote"));
            rep.below("asymptote_heat", std::abs(total.Q - q_inf), ctx.tol("asymptote"));
            rep.below("asymptote_entropy_production", std::abs(total.dSi - s_inf), ctx.tol("asymptote"));
        }
        if (c.kind == MapKind::Ness && steps.size() >= 2) {
            const ThermoRecord& a = steps[steps.size() - 2].step;
            const ThermoRecord& b = steps.back().step;
            const double drift = std::max({std::abs(a.dE - b.dE), std::abs(a.Q - b.Q), std::abs(a.W - b.W),
                                           std::abs(a.dS - b.dS), std::abs(a.dSi - b.dSi)});
            rep.report["ness_step"] = to_json(b);
            rep.below("ness_constancy", drift, ctx.tol("constancy"));
        }
    }

    const MeasurementBasis energy = measurement_basis(seq.steps().front().system_hamiltonian(), "energy");
    if (estimated_records(chain, energy) <= static_cast<double>(ctx.cfg.run.budget)) {
        const Ensemble ens = enumerate_sequence(seq, energy, energy, rho0, ctx.cfg.run.budget);
        ensemble_outputs(rep, ctx, ens);
        detailed_ft(rep, ctx, seq.steps(), energy, ens);
    } else {
        rep.report["trajectories"] = "skipped: above run.budget";
    }
    return rep;
}

// --- cycle ----------------------------------------------------------------

VariantReport run_cycle_kind(const Context& ctx) {
    VariantReport rep;
    const ModelConfig& m = ctx.variant.model;
    const CycleConfig& cc = *ctx.cfg.cycle;
    const MapSpec drive = make_spec(m, cc.drive);
    const MapSpec relax = make_spec(m, cc.relax);
    const DensityMatrix omega = gibbs_state(drive.system_hamiltonian(), m.beta);
    kraus_checks(rep, ctx, drive, kraus_from_dilation(drive), omega, "drive_");
    kraus_checks(rep, ctx, relax, kraus_from_dilation(relax), omega, "relax_");
    std::vector<MapSpec> relaxers(static_cast<std::size_t>(cc.relax_steps), relax);
    const CycleResult r = run_cycle({drive, std::move(relaxers), cc.tolerance});

    std::vector<std::vector<double>> stair;
    std::vector<std::vector<double>> per_step;
    std::vector<ThermoRecord> records;
    for (std::size_t s = 0; s < r.steps.size(); ++s) {
        const ThermoRecord& cum = r.steps[s].cumulative;
        stair.push_back({static_cast<double>(s + 1), r.hs_distance[s], cum.W, cum.Q, cum.dSi});
        per_step.push_back(row(static_cast<int>(s + 1), r.steps[s].step));
        records.push_back(r.steps[s].step);
    }
    ctx.out.csv("staircase.csv", {"step", "hs_distance", "W_cum", "Q_cum", "dSi_cum"}, stair);
    ctx.out.csv("thermo.csv", kThermoHeader, per_step);
    law_checks(rep, ctx, records, m.beta);

    ctx.out.distribution("p_drive_w.csv", r.p_drive_w);
    ctx.out.distribution("p_cycle_w.csv", r.p_cycle_w);
    ctx.out.distribution("p_drive_dsi.csv", r.p_drive_dsi);
    ctx.out.distribution("p_cycle_dsi.csv", r.p_cycle_dsi);
    const Distribution drive_bw = r.p_drive_w.scaled(m.beta);
    ctx.out.distribution("p_drive_bw.csv", drive_bw);

    const ThermoRecord& total = r.steps.back().cumulative;
    rep.report["drive_work"] = r.drive_work;
    rep.report["total_entropy_production"] = r.total_entropy_production;
    rep.report["final_hs_distance"] = r.final_distance();
    if (r.thermalized_at) {
        rep.report["thermalized_at"] = *r.thermalized_at;
    }
    rep.below("thermalization", r.final_distance(), cc.tolerance);
    const DistributionDiff w_gap = compare(r.p_cycle_w, r.p_drive_w, ctx.tol("atom"));
    rep.below("cycle_work_equals_drive_work", std::max(w_gap.max_prob_gap, w_gap.max_value_gap),
              ctx.tol("work_equality"));
    rep.below("entropy_production_equals_beta_w", std::abs(r.total_entropy_production - m.beta * r.drive_work),
              ctx.tol("closure"));
    rep.below("energy_closure", std::abs(total.dE), ctx.tol("closure"));
    rep.below("entropy_closure", std::abs(total.dS), ctx.tol("closure"));
    const DistributionDiff dsi_gap = compare(r.p_drive_dsi, r.p_cycle_dsi, ctx.tol("atom"));
    rep.above("drive_and_cycle_entropy_production_differ", dsi_gap.max_prob_gap, 1e-4);
    const double rebin = ctx.tol("rebin");
    const DistributionDiff bw_gap = compare(r.p_cycle_dsi.rebinned(rebin), drive_bw.rebinned(rebin), rebin);
    rep.report["cycle_dsi_vs_beta_w"] = json{{"value_gap", bw_gap.max_value_gap}, {"prob_gap", bw_gap.max_prob_gap}};
    rep.below("cycle_entropy_production_matches_beta_w", bw_gap.max_prob_gap, rebin);
    return rep;
}

// --- lindblad -------------------------------------------------------------

VariantReport run_lindblad_kind(const Context& ctx) {
    VariantReport rep;
    const ModelConfig& m = ctx.variant.model;
    const LindbladConfig& lc = *ctx.cfg.lindblad;
    const ComplexMatrix hs = system_hamiltonian(m);
    const ComplexMatrix hb = bath_hamiltonian(m);
    CouplingSpec unit = *m.coupling;
    unit.tau = 0.0;
    const ComplexMatrix v = build_coupling(unit, m.chain.sites);
    const LindbladGenerator gen = generator_from_coupling(v, hs, hb, m.beta);
    const DensityMatrix rho0 = initial_state(ctx);
    const DensityMatrix steady = steady_state(gen);

    const auto samples = integrate(gen, rho0, lc.t_final, lc.dt, static_cast<std::size_t>(lc.sample_every));
    std::vector<std::vector<double>> rows;
    int clamped = 0;
    for (const auto& s : samples) {
        rows.push_back({s.t, s.rate.Q_dot, s.rate.W_dot, s.rate.Si_dot, s.W_cum, s.Q_cum, s.Si_cum,
                        hs_distance(s.rho, steady.matrix())});
        clamped += s.rate.clamped;
    }
    ctx.out.csv("lindblad.csv", {"t", "Q_dot", "W_dot", "Si_dot", "W_cum", "Q_cum", "Si_cum", "hs_to_steady"}, rows);
    const LindbladSample& last = samples.back();
    rep.report["channels"] = gen.channels.size();
    rep.report["clamped_eigenvalues"] = clamped;
    rep.report["final"] = json{{"t", last.t}, {"W_cum", last.W_cum}, {"Q_cum", last.Q_cum}, {"Si_cum", last.Si_cum}};
    rep.below("trace_preservation", std::abs(last.rho.trace().real() - 1.0), ctx.tol("trace"));
    double min_si = 0.0;
    for (const auto& s : samples) {
        min_si = std::min(min_si, s.rate.Si_dot);
    }
    rep.at_least("entropy_production_rate_nonnegative", min_si, -ctx.tol("positivity"));

    if (const auto h0 = h0_candidate(m)) {
        const DetailedBalanceReport db = detailed_balance_check(gen, *h0);
        rep.report["detailed_balance"] = json{{"eigenoperator_residual", db.eigenoperator_residual},
                                              {"h0_commutator", db.h0_commutator},
                                              {"stationarity", db.stationarity},
                                              {"passed", db.passed}};
        if (db.passed) {
            const DensityMatrix omega0 = gibbs_state(*h0, m.beta);
            if (inf_norm(hs - *h0) < 1e-12) {
                rep.below("thermal_work", std::abs(last.W_cum), ctx.tol("thermal_work"));
            } else {
                const double w_inf = ((hs - *h0) * (omega0.matrix() - rho0.matrix())).trace().real();
                rep.report["relaxation_work_asymptote"] = w_inf;
                rep.below("relaxation_work", std::abs(last.W_cum - w_inf), ctx.tol("lindblad_work"));
            }
        }
    }

    const ConvergenceTable table = convergence_check(v, hs, hb, m.beta, rho0, lc.convergence_t, lc.taus);
    std::vector<std::vector<double>> conv;
    for (const auto& r : table.rows) {
        conv.push_back({r.tau, r.error, r.order ? *r.order : std::nan("")});
    }
    ctx.out.csv("convergence.csv", {"tau", "error", "order_estimate"}, conv);
    rep.report["convergence_monotone"] = table.monotone;
    if (table.min_order) {
        rep.at_least("convergence_order", *table.min_order, ctx.tol("order"));
    }
    return rep;
}

// --- ft_check -------------------------------------------------------------

VariantReport run_ft_kind(const Context& ctx) {
    VariantReport rep;
    const ModelConfig& m = ctx.variant.model;
    const MapSpec spec = make_spec(m, *m.coupling);
    const KrausSet k = kraus_from_dilation(spec);
    const DensityMatrix rho = initial_state(ctx);
    kraus_checks(rep, ctx, spec, k, rho);
    const MapClassification c = classify(spec, k, m, ctx.cfg.seed);
    classification_checks(rep, ctx, c);

    const MeasurementBasis energy = measurement_basis(spec.system_hamiltonian(), "energy");
    const Ensemble ens = enumerate(spec, energy, energy, rho);
    ensemble_outputs(rep, ctx, ens);
    detailed_ft(rep, ctx, {spec}, energy, ens);

    const CrooksReport crooks = crooks_check(spec, TimeReversal::spin(m.chain.sites), TimeReversal::spin(1));
    std::vector<std::vector<double>> rows;
    for (const auto& a : crooks.atoms) {
        rows.push_back({a.w, a.p, a.p_mirror, a.missing_mirror ? std::nan("") : a.residual});
    }
    ctx.out.csv("crooks.csv", {"w", "p", "p_mirror", "residual"}, rows);
    ctx.out.distribution("p_w_forward.csv", crooks.forward);
    ctx.out.distribution("p_w_backward.csv", crooks.backward);
    rep.report["crooks_atoms"] = crooks.atoms.size();
    rep.report["crooks_violations"] = crooks.violations;
    rep.below("crooks", crooks.violations > 0 ? INFINITY : crooks.max_residual, ctx.tol("ft"));
    rep.below("forward_backward_work_equality", crooks.reversal_gap, ctx.tol("work_equality"));
    return rep;
}

VariantReport dispatch(const Context& ctx) {
    switch (ctx.cfg.kind) {
    case Kind::SingleMap:
        return run_single(ctx);
    case Kind::Sequence:
        return run_sequence_kind(ctx);
    case Kind::Cycle:
        return run_cycle_kind(ctx);
    case Kind::Lindblad:
        return run_lindblad_kind(ctx);
    case Kind::FtCheck:
        return run_ft_kind(ctx);
    }
    throw ContractError("unknown scenario kind");
}

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw OutputError("cannot create output directory " + dir.string());
    }
}

json check_json(const Check& c) {
    return json{{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"relation", c.relation},
                {"pass", c.pass}};
}

}  // namespace

fs::path default_out_dir(const ScenarioConfig& cfg) {
    if (!cfg.run.out.empty()) {
        return cfg.run.out;
    }
    return fs::path("out") / cfg.name;
}

RunOutcome run_scenario(const ScenarioConfig& cfg, const fs::path& out_dir) {
    RunOutcome outcome;
    outcome.out_dir = out_dir;
    make_dir(out_dir);

    std::mt19937_64 rng(cfg.seed);
    json variants = json::array();
    for (const auto& variant : cfg.variants) {
        const fs::path dir = variant.name.empty() ? out_dir : out_dir / variant.name;
        make_dir(dir);
        Writer writer(dir, cfg.config_hash, outcome);
        const Context ctx{cfg, variant, writer, rng};
        VariantReport rep = dispatch(ctx);

        bool pass = true;
        json checks = json::array();
        for (auto& c : rep.checks) {
            pass = pass && c.pass;
            checks.push_back(check_json(c));
            if (!variant.name.empty()) {
                c.name = variant.name + "." + c.name;
            }
            outcome.checks.push_back(c);
        }
        outcome.passed = outcome.passed && pass;
        json v;
        v["name"] = variant.name;
        v["report"] = rep.report;
        v["checks"] = checks;
        v["pass"] = pass;
        variants.push_back(v);
    }

    json summary;
    summary["scenario"] = cfg.name;
    summary["kind"] = to_string(cfg.kind);
    summary["config_hash"] = cfg.config_hash;
    summary["seed"] = cfg.seed;
    summary["variants"] = variants;
    summary["pass"] = outcome.passed;
    Writer(out_dir, cfg.config_hash, outcome).write("summary.json", summary.dump(2) + "\n");
    return outcome;
}

}  // namespace qmap::cli
