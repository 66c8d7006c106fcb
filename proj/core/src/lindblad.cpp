#include "qmap/lindblad.hpp"

#include "qmap/cptp_map.hpp"
#include "qmap/error.hpp"
#include "qmap/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qmap {

namespace {

ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a * b + b * a;
}

// ln ρ with every eigenvalue below the floor lifted to it.
ComplexMatrix floored_log(const ComplexMatrix& rho, int& clamped) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (rho + rho.adjoint()));
    RealVector logs(es.eigenvalues().size());
    clamped = 0;
    for (Eigen::Index k = 0; k < logs.size(); ++k) {
        double l = es.eigenvalues()(k);
        if (l < kEigFloor) {
            ++clamped;
            l = kEigFloor;
        }
        logs(k) = std::log(l);
    }
    return es.eigenvectors() * logs.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

double trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
    return (a * b).trace().real();
}

}  // namespace

ComplexMatrix LindbladGenerator::dissipator(const ComplexMatrix& rho) const {
    ComplexMatrix out = ComplexMatrix::Zero(dim(), dim());
    for (const auto& c : channels) {
        if (!c.active) {
            continue;
        }
        const ComplexMatrix& l = c.op;
        const ComplexMatrix ld = l.adjoint();
        out += c.gamma * (l * rho * ld - 0.5 * anticommutator(ld * l, rho));
        out += (c.gamma / c.omega) * (ld * rho * l - 0.5 * anticommutator(l * ld, rho));
    }
    return out;
}

ComplexMatrix LindbladGenerator::operator()(const ComplexMatrix& rho) const {
    const Complex minus_i(0.0, -1.0);
    return minus_i * commutator(h_system, rho) + dissipator(rho);
}

double LindbladGenerator::norm_bound() const {
    double bound = 2.0 * spectral_norm(h_system);
    for (const auto& c : channels) {
        if (c.active) {
            const double l = spectral_norm(c.op);
            bound += c.gamma * (1.0 + 1.0 / c.omega) * 2.0 * l * l;
        }
    }
    return bound;
}

ComplexMatrix LindbladGenerator::superoperator() const {
    const Eigen::Index d = dim();
    const ComplexMatrix id = identity(d);
    const Complex minus_i(0.0, -1.0);
    ComplexMatrix s = minus_i * (kron(id, h_system) - kron(h_system.transpose(), id));
    auto add = [&](const ComplexMatrix& a, double g) {
        const ComplexMatrix ada = a.adjoint() * a;
        s += g * (kron(a.conjugate(), a) - 0.5 * kron(id, ada) - 0.5 * kron(ada.transpose(), id));
    };
    for (const auto& c : channels) {
        if (c.active) {
            add(c.op, c.gamma);
            add(c.op.adjoint(), c.gamma / c.omega);
        }
    }
    return s;
}

LindbladGenerator generator_from_coupling(const ComplexMatrix& v, const ComplexMatrix& h_system,
                                          const ComplexMatrix& h_bath, double beta) {
    const MapSpec probe(h_system, h_bath, v, 0.0, beta);
    const BathLevels& bath = probe.bath_levels();
    const Eigen::Index ds = probe.system_dim();
    const Eigen::Index db = probe.bath_dim();
    const ComplexMatrix w = kron(identity(ds), bath.vectors);
    const ComplexMatrix vb = w.adjoint() * v * w;

    LindbladGenerator gen;
    gen.h_system = h_system;
    gen.beta = beta;
    for (Eigen::Index i = 0; i < db; ++i) {
        for (Eigen::Index j = i; j < db; ++j) {
            LindbladChannel c;
            c.op.resize(ds, ds);
            for (Eigen::Index a = 0; a < ds; ++a) {
                for (Eigen::Index b = 0; b < ds; ++b) {
                    c.op(a, b) = vb(a * db + j, b * db + i);
                }
            }
            c.i = static_cast<int>(i);
            c.j = static_cast<int>(j);
            c.eps_i = bath.energies(i);
            c.eps_j = bath.energies(j);
            c.gamma = (i < j ? 1.0 : 0.5) * bath.weights(i);
            c.omega = std::exp(beta * (c.eps_j - c.eps_i));
            c.active = inf_norm(c.op) >= kInactiveChannel;
            gen.channels.push_back(std::move(c));
        }
    }
    return gen;
}

RateRecord rates(const LindbladGenerator& gen, const ComplexMatrix& rho) {
    RateRecord r;
    for (const auto& c : gen.channels) {
        if (!c.active) {
            continue;
        }
        // The i<j channel carries both bath transitions i→j and j→i.
        const double forward = trace_product(c.op * rho, c.op.adjoint());
        const double backward = trace_product(c.op.adjoint() * rho, c.op);
        const double de = c.eps_i - c.eps_j;
        if (c.i == c.j) {
            continue;
        }
        r.Q_dot += c.gamma * de * forward - (c.gamma / c.omega) * de * backward;
    }
    const ComplexMatrix d = gen.dissipator(rho);
    r.W_dot = trace_product(gen.h_system, d) - r.Q_dot;
    const ComplexMatrix log_rho = floored_log(rho, r.clamped);
    r.Si_dot = -trace_product(d, log_rho) - gen.beta * r.Q_dot;
    return r;
}

double DetailedBalanceReport::max_residual() const {
    return std::max({eigenoperator_residual, h0_commutator, stationarity});
}

DetailedBalanceReport detailed_balance_check(const LindbladGenerator& gen, const ComplexMatrix& h0) {
    if (h0.rows() != gen.dim() || h0.cols() != gen.dim()) {
        throw DimensionError("detailed_balance_check: H0 must act on the system space");
    }
    DetailedBalanceReport rep;
    for (const auto& c : gen.channels) {
        if (!c.active) {
            continue;
        }
        const double de = c.eps_i - c.eps_j;
        const ComplexMatrix& l = c.op;
        rep.eigenoperator_residual =
            std::max({rep.eigenoperator_residual, inf_norm(commutator(h0, l) - de * l),
                      inf_norm(commutator(h0, l.adjoint()) + de * l.adjoint())});
    }
    rep.h0_commutator = inf_norm(commutator(h0, gen.h_system));
    rep.stationarity = inf_norm(gen(gibbs_state(h0, gen.beta).matrix()));
    rep.passed = rep.eigenoperator_residual < 1e-9 && rep.h0_commutator < 1e-10 && rep.stationarity < 1e-9;
    return rep;
}

RateRecord simplified_rates(const LindbladGenerator& gen, const ComplexMatrix& h0, const ComplexMatrix& rho) {
    const DetailedBalanceReport rep = detailed_balance_check(gen, h0);
    if (!rep.passed) {
        std::ostringstream os;
        os << "simplified_rates: no detailed balance with respect to H0 (residual " << rep.max_residual() << ")";
        throw ContractError(os.str());
    }
    RateRecord r;
    const ComplexMatrix d = gen.dissipator(rho);
    r.Q_dot = trace_product(h0, d);
    r.W_dot = trace_product(gen.h_system - h0, d);
    const ComplexMatrix log_rho = floored_log(rho, r.clamped);
    r.Si_dot = -trace_product(d, log_rho) - gen.beta * r.Q_dot;
    return r;
}

DensityMatrix steady_state(const LindbladGenerator& gen) {
    const Eigen::Index d = gen.dim();
    const ComplexMatrix s = gen.superoperator();
    ComplexMatrix a(d * d + 1, d * d);
    a.topRows(d * d) = s;
    a.row(d * d).setZero();
    for (Eigen::Index k = 0; k < d; ++k) {
        a(d * d, k * d + k) = 1.0;
    }
    ComplexVector rhs = ComplexVector::Zero(d * d + 1);
    rhs(d * d) = 1.0;
    const ComplexVector x = a.colPivHouseholderQr().solve(rhs);
    const double residual = (a * x - rhs).norm();
    if (residual > 1e-9) {
        std::ostringstream os;
        os << "steady_state: generator has no unique stationary state (residual " << residual << ")";
        throw ConvergenceError(os.str(), residual);
    }
    const ComplexMatrix rho = Eigen::Map<const ComplexMatrix>(x.data(), d, d);
    return DensityMatrix::from(0.5 * (rho + rho.adjoint()), 1e-9);
}

std::vector<LindbladSample> integrate(const LindbladGenerator& gen, const DensityMatrix& rho0, double t_final,
                                      double dt, std::size_t stride) {
    if (rho0.dim() != gen.dim()) {
        throw DimensionError("integrate: initial state does not match the generator");
    }
    if (!(t_final >= 0.0) || !(dt > 0.0)) {
        throw ContractError("integrate: need t_final >= 0 and dt > 0");
    }
    const auto steps = static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
    const double h = steps == 0 ? dt : t_final / static_cast<double>(steps);
    const double bound = gen.norm_bound();
    if (h * bound >= 0.1) {
        std::ostringstream os;
        os << "integrate: dt * ||L|| = " << h * bound << " does not resolve the fastest scale (need < 0.1)";
        throw StepSizeError(os.str());
    }
    stride = std::max<std::size_t>(stride, 1);

    struct Deriv {
        ComplexMatrix rho;
        RateRecord rate;
    };
    auto eval = [&](const ComplexMatrix& rho) {
        return Deriv{gen(rho), rates(gen, rho)};
    };

    std::vector<LindbladSample> out;
    ComplexMatrix rho = rho0.matrix();
    double w = 0.0;
    double q = 0.0;
    double si = 0.0;
    Deriv k1 = eval(rho);
    out.push_back({0.0, rho, k1.rate, w, q, si});
    for (std::size_t n = 1; n <= steps; ++n) {
        const Deriv k2 = eval(rho + 0.5 * h * k1.rho);
        const Deriv k3 = eval(rho + 0.5 * h * k2.rho);
        const Deriv k4 = eval(rho + h * k3.rho);
        rho += (h / 6.0) * (k1.rho + 2.0 * k2.rho + 2.0 * k3.rho + k4.rho);
        rho = 0.5 * (rho + rho.adjoint());
        auto combine = [&](double RateRecord::*f) {
            return (h / 6.0) * (k1.rate.*f + 2.0 * (k2.rate.*f) + 2.0 * (k3.rate.*f) + k4.rate.*f);
        };
        w += combine(&RateRecord::W_dot);
        q += combine(&RateRecord::Q_dot);
        si += combine(&RateRecord::Si_dot);

        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho, Eigen::EigenvaluesOnly);
        const double min_eig = es.eigenvalues().minCoeff();
        if (min_eig < -1e-7) {
            std::ostringstream os;
            os << "integrate: state lost positivity at t = " << static_cast<double>(n) * h << " (eigenvalue "
               << min_eig << ")";
            throw PositivityError(os.str());
        }
        k1 = eval(rho);
        if (n % stride == 0 || n == steps) {
            out.push_back({static_cast<double>(n) * h, rho, k1.rate, w, q, si});
        }
    }
    return out;
}

ConvergenceTable convergence_check(const ComplexMatrix& v, const ComplexMatrix& h_system,
                                   const ComplexMatrix& h_bath, double beta, const DensityMatrix& rho0,
                                   double t, const std::vector<double>& taus) {
    if (taus.empty()) {
        throw ContractError("convergence_check: empty tau grid");
    }
    const LindbladGenerator gen = generator_from_coupling(v, h_system, h_bath, beta);
    const double tau_min = *std::min_element(taus.begin(), taus.end());
    const double dt = std::min(tau_min / 10.0, 0.05 / std::max(gen.norm_bound(), 1e-12));
    const ComplexMatrix reference = integrate(gen, rho0, t, dt, std::numeric_limits<std::size_t>::max()).back().rho;

    ConvergenceTable table;
    for (const double tau : taus) {
        if (!(tau > 0.0)) {
            throw ContractError("convergence_check: tau must be > 0");
        }
        const double ratio = t / tau;
        const auto n = static_cast<long>(std::llround(ratio));
        if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio)) {
            std::ostringstream os;
            os << "convergence_check: t = " << t << " is not a multiple of tau = " << tau;
            throw ContractError(os.str());
        }
        const MapSpec spec(h_system, h_bath, v / std::sqrt(tau), tau, beta);
        const KrausSet k = kraus_from_dilation(spec);
        ComplexMatrix rho = rho0.matrix();
        for (long s = 0; s < n; ++s) {
            rho = apply_kraus(k, rho);
        }
        ConvergenceRow row;
        row.tau = tau;
        row.error = (rho - reference).norm();
        if (!table.rows.empty()) {
            const ConvergenceRow& prev = table.rows.back();
            if (row.error > prev.error) {
                table.monotone = false;
            }
            if (prev.error > 1e-13 && row.error > 1e-13 && prev.tau != tau) {
                row.order = std::log(prev.error / row.error) / std::log(prev.tau / tau);
                table.min_order = table.min_order ? std::min(*table.min_order, *row.order) : *row.order;
            }
        }
        table.rows.push_back(row);
    }
    return table;
}

}  // namespace qmap
