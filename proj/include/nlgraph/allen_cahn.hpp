#pragma once

#include "errors.hpp"
#include "operators.hpp"
#include "point_cloud.hpp"
#include "random.hpp"
#include "regress.hpp"
#include "state_series.hpp"
#include "stencil.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace nlgraph::allen_cahn
{

/// Landau density f = (1 - phi^2)^2 and its derivatives.
inline double f(double phi) { return (1.0 - phi * phi) * (1.0 - phi * phi); }
inline double df(double phi) { return 4.0 * phi * phi * phi - 4.0 * phi; }
inline double d2f(double phi) { return 12.0 * phi * phi - 4.0; }

/// Phase indicator; phi = 0 counts as the positive phase.
inline double indicator(double phi) { return phi >= 0.0 ? 1.0 : 0.0; }

struct InitialCondition
{
	enum class Kind
	{
		constant,
		tanh,
		cosine
	};
	Kind kind = Kind::cosine;
	double value = 0.0;   // constant level, or the mean of the cosine series
	double center = 0.5;  // tanh interface position
	double width = 0.05;  // tanh interface width
	int modes = 6;        // cosine modes cos(k pi x / L), k = 1..modes
	double amplitude = 1.0;
	double mean_spread = 0.0; // cosine mean is value + U[-spread, spread]
	std::uint64_t seed = 1;

	static InitialCondition constant(double v) { return {Kind::constant, v}; }
	static InitialCondition tanh_profile(double center, double width)
	{
		InitialCondition ic;
		ic.kind = Kind::tanh;
		ic.center = center;
		ic.width = width;
		return ic;
	}
	static InitialCondition cosine(std::uint64_t seed, int modes = 6, double amplitude = 1.0, double mean = 0.0,
		double mean_spread = 0.0)
	{
		InitialCondition ic;
		ic.kind = Kind::cosine;
		ic.seed = seed;
		ic.modes = modes;
		ic.amplitude = amplitude;
		ic.value = mean;
		ic.mean_spread = mean_spread;
		return ic;
	}

	/// Samples the profile at the grid nodes. The cosine mean is drawn first,
	/// then the amplitudes a_k ~ U[-A, A] / k.
	Eigen::VectorXd sample(const Eigen::VectorXd& x, double L) const
	{
		Eigen::VectorXd phi(x.size());
		switch (kind)
		{
		case Kind::constant: phi.setConstant(value); break;
		case Kind::tanh:
			for (Eigen::Index i = 0; i < x.size(); ++i)
				phi(i) = std::tanh((x(i) - center) / width);
			break;
		case Kind::cosine:
		{
			Rng rng(seed, 0x6963); // stream "ic"
			const double mean = value + rng.uniform(-mean_spread, mean_spread);
			std::vector<double> a(static_cast<std::size_t>(modes));
			for (int k = 0; k < modes; ++k)
				a[static_cast<std::size_t>(k)] = rng.uniform(-amplitude, amplitude) / (k + 1);
			for (Eigen::Index i = 0; i < x.size(); ++i)
			{
				double v = mean;
				for (int k = 0; k < modes; ++k)
					v += a[static_cast<std::size_t>(k)] * std::cos((k + 1) * std::numbers::pi * x(i) / L);
				phi(i) = v;
			}
			break;
		}
		}
		return phi;
	}
};

struct Config
{
	double mobility = 1e-3;
	double lambda = 1.0;
	double dt = 1e-2;
	std::size_t steps = 386;
	std::size_t nodes = 101;
	double length = 1.0;
	InitialCondition initial;
	double newton_tolerance = 1e-10;
	int newton_max_iterations = 50;

	double dx() const { return length / static_cast<double>(nodes - 1); }

	void validate() const
	{
		if (!(mobility >= 0.0) || !std::isfinite(mobility))
			throw DomainError("mobility must be finite and non-negative");
		if (!(lambda > 0.0) || !std::isfinite(lambda))
			throw DomainError("gradient coefficient must be positive");
		if (!(dt > 0.0) || !std::isfinite(dt))
			throw DomainError("time step must be positive");
		if (nodes < 3)
			throw DomainError("grid needs at least three nodes");
		if (!(length > 0.0))
			throw DomainError("domain length must be positive");
	}
};

/// phi(x_i, t_n): one row per time level (initial state first).
struct Field
{
	Eigen::VectorXd x;
	std::vector<double> time;
	Eigen::MatrixXd phi;
	Config config;
};

/// Second-order Laplacian with ghost-node zero-flux ends.
inline Eigen::VectorXd laplacian(const Eigen::VectorXd& phi, double dx)
{
	const Eigen::Index n = phi.size();
	Eigen::VectorXd out(n);
	const double s = 1.0 / (dx * dx);
	out(0) = 2.0 * (phi(1) - phi(0)) * s;
	out(n - 1) = 2.0 * (phi(n - 2) - phi(n - 1)) * s;
	for (Eigen::Index i = 1; i < n - 1; ++i)
		out(i) = (phi(i - 1) - 2.0 * phi(i) + phi(i + 1)) * s;
	return out;
}

/// Central-difference gradient; zero at the ends per the zero-flux condition.
inline Eigen::VectorXd gradient(const Eigen::VectorXd& phi, double dx)
{
	const Eigen::Index n = phi.size();
	Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
	for (Eigen::Index i = 1; i < n - 1; ++i)
		g(i) = (phi(i + 1) - phi(i - 1)) / (2.0 * dx);
	return g;
}

/// Trapezoid weights divided by |Omega| (volume averaging).
inline Eigen::VectorXd quadrature_weights(std::size_t nodes)
{
	Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(nodes), 1.0 / static_cast<double>(nodes - 1));
	w(0) *= 0.5;
	w(w.size() - 1) *= 0.5;
	return w;
}

/// Volume-averaged discrete energy: trapezoid of f plus lambda/2 sum over edges
/// of the squared difference quotient. Its gradient in the trapezoid metric is
/// f'(phi) - lambda * laplacian(phi), so the scheme below is a discrete gradient flow.
inline double energy(const Eigen::VectorXd& phi, double lambda, double dx, double length)
{
	const Eigen::VectorXd w = quadrature_weights(static_cast<std::size_t>(phi.size()));
	double e = 0.0;
	for (Eigen::Index i = 0; i < phi.size(); ++i)
		e += w(i) * f(phi(i));
	double g = 0.0;
	for (Eigen::Index i = 0; i + 1 < phi.size(); ++i)
	{
		const double d = (phi(i + 1) - phi(i)) / dx;
		g += d * d * dx;
	}
	return e + 0.5 * lambda * g / length;
}

namespace detail
{

// Thomas algorithm for sub/main/super diagonals a, b, c (a(0), c(n-1) unused).
inline Eigen::VectorXd solve_tridiagonal(Eigen::VectorXd a, Eigen::VectorXd b, Eigen::VectorXd c, Eigen::VectorXd d)
{
	const Eigen::Index n = b.size();
	for (Eigen::Index i = 1; i < n; ++i)
	{
		const double m = a(i) / b(i - 1);
		b(i) -= m * c(i - 1);
		d(i) -= m * d(i - 1);
	}
	Eigen::VectorXd x(n);
	x(n - 1) = d(n - 1) / b(n - 1);
	for (Eigen::Index i = n - 2; i >= 0; --i)
		x(i) = (d(i) - c(i) * x(i + 1)) / b(i);
	return x;
}

} // namespace detail

/// Backward Euler in time for d phi/dt = -M (f'(phi) - lambda lap phi), each
/// step solved by Newton iteration to a max-norm residual below the tolerance.
inline Field solve(const Config& cfg)
{
	cfg.validate();
	const auto n = static_cast<Eigen::Index>(cfg.nodes);
	const double dx = cfg.dx();
	Field out;
	out.config = cfg;
	out.x = Eigen::VectorXd::LinSpaced(n, 0.0, cfg.length);
	out.phi.resize(static_cast<Eigen::Index>(cfg.steps + 1), n);
	out.phi.row(0) = cfg.initial.sample(out.x, cfg.length).transpose();
	out.time.push_back(0.0);

	const double k = cfg.dt * cfg.mobility;
	const double s = cfg.lambda / (dx * dx);
	Eigen::VectorXd prev = out.phi.row(0).transpose();
	for (std::size_t step = 1; step <= cfg.steps; ++step)
	{
		Eigen::VectorXd phi = prev;
		bool converged = false;
		for (int it = 0; it < cfg.newton_max_iterations; ++it)
		{
			Eigen::VectorXd res = phi - prev + k * (phi.unaryExpr(&df) - cfg.lambda * laplacian(phi, dx));
			if (!res.allFinite())
				break;
			if (res.lpNorm<Eigen::Infinity>() <= cfg.newton_tolerance)
			{
				converged = true;
				break;
			}
			Eigen::VectorXd a = Eigen::VectorXd::Constant(n, -k * s);
			Eigen::VectorXd c = Eigen::VectorXd::Constant(n, -k * s);
			Eigen::VectorXd b(n);
			for (Eigen::Index i = 0; i < n; ++i)
				b(i) = 1.0 + k * (d2f(phi(i)) + 2.0 * s);
			c(0) = -2.0 * k * s;
			a(n - 1) = -2.0 * k * s;
			phi -= detail::solve_tridiagonal(a, b, c, res);
		}
		if (!converged)
			throw SolverError("Newton iteration did not converge at step " + std::to_string(step), step);
		out.phi.row(static_cast<Eigen::Index>(step)) = phi.transpose();
		out.time.push_back(static_cast<double>(step) * cfg.dt);
		prev = std::move(phi);
	}
	return out;
}

/// Names of the functionals produced by extract_states, in column order.
inline std::vector<std::string> state_names()
{
	std::vector<std::string> n{"Psi", "F_p", "F_m", "dF_p", "dF_m"};
	for (int k = 0; k <= 4; ++k)
		for (const char* side : {"_p", "_m"})
			n.push_back("phi" + std::to_string(k) + side);
	for (int k = 1; k <= 2; ++k)
		for (const char* side : {"_p", "_m"})
			n.push_back("grad" + std::to_string(k) + side);
	for (int k = 1; k <= 2; ++k)
		for (const char* side : {"_p", "_m"})
			n.push_back("absgrad" + std::to_string(k) + side);
	for (int k = 1; k <= 2; ++k)
		for (int l = 1; l <= 2; ++l)
			for (const char* side : {"_p", "_m"})
				n.push_back("phi" + std::to_string(k) + "grad" + std::to_string(l) + side);
	return n;
}

/// Functionals of one field snapshot, volume averaged by trapezoid quadrature:
///   Psi, F_+-, F'_+-, phi_k+- (k = 0..4), grad^k phi_+- (k = 1, 2),
///   |grad phi|^k_+- (k = 1, 2), phi^k grad^l phi_+- (k, l = 1, 2).
/// `_p` integrates against I(phi) and `_m` against 1 - I(phi).
inline Eigen::RowVectorXd snapshot_states(const Eigen::VectorXd& phi, const Config& cfg)
{
	const double dx = cfg.dx();
	const Eigen::VectorXd w = quadrature_weights(static_cast<std::size_t>(phi.size()));
	const Eigen::VectorXd g = gradient(phi, dx);
	const Eigen::VectorXd lap = laplacian(phi, dx);
	const auto names = state_names();
	Eigen::RowVectorXd out(static_cast<Eigen::Index>(names.size()));
	Eigen::Index c = 0;
	auto both = [&](auto integrand) {
		double p = 0.0, m = 0.0;
		for (Eigen::Index i = 0; i < phi.size(); ++i)
		{
			const double v = w(i) * integrand(i);
			(indicator(phi(i)) > 0.0 ? p : m) += v;
		}
		out(c++) = p;
		out(c++) = m;
	};
	out(c++) = energy(phi, cfg.lambda, dx, cfg.length);
	both([&](Eigen::Index i) { return f(phi(i)); });
	both([&](Eigen::Index i) { return df(phi(i)); });
	for (int k = 0; k <= 4; ++k)
		both([&](Eigen::Index i) { return std::pow(phi(i), k); });
	both([&](Eigen::Index i) { return g(i); });
	both([&](Eigen::Index i) { return lap(i); });
	for (int k = 1; k <= 2; ++k)
		both([&](Eigen::Index i) { return std::pow(std::abs(g(i)), k); });
	for (int k = 1; k <= 2; ++k)
	{
		both([&](Eigen::Index i) { return std::pow(phi(i), k) * g(i); });
		both([&](Eigen::Index i) { return std::pow(phi(i), k) * lap(i); });
	}
	return out;
}

inline StateSeries extract_states(const Field& field)
{
	StateSeries s;
	s.time = field.time;
	s.names = state_names();
	s.values.resize(field.phi.rows(), static_cast<Eigen::Index>(s.names.size()));
	for (Eigen::Index t = 0; t < field.phi.rows(); ++t)
		s.values.row(t) = snapshot_states(field.phi.row(t).transpose(), field.config);
	s.parameters = {{"M", field.config.mobility}, {"lambda", field.config.lambda}, {"dt", field.config.dt}};
	s.provenance = Provenance::generated;
	return s;
}

enum class RomForm
{
	/// I(phi) M (4 phi^2 - 4 phi^4 + lambda phi lap phi)
	printed,
	/// I(phi) M (4 phi - 4 phi^3 + lambda lap phi) = -I(phi) M dPsi/dphi
	consistent
};

/// Exact reduced right-hand side of d phi_1+/dt per time level, alongside the
/// backward difference of phi_1+ (NaN at the first level).
struct RomRhs
{
	std::vector<double> time;
	Eigen::VectorXd rhs;
	Eigen::VectorXd finite_difference;
};

inline double rom_rhs_snapshot(const Eigen::VectorXd& phi, const Config& cfg, RomForm form)
{
	const Eigen::VectorXd w = quadrature_weights(static_cast<std::size_t>(phi.size()));
	const Eigen::VectorXd lap = laplacian(phi, cfg.dx());
	double s = 0.0;
	for (Eigen::Index i = 0; i < phi.size(); ++i)
	{
		const double p = phi(i);
		const double v = form == RomForm::printed ? 4.0 * p * p - 4.0 * p * p * p * p + cfg.lambda * p * lap(i) :
													4.0 * p - 4.0 * p * p * p + cfg.lambda * lap(i);
		s += w(i) * indicator(p) * v;
	}
	return cfg.mobility * s;
}

inline RomRhs exact_rom_rhs(const Field& field, RomForm form = RomForm::printed)
{
	RomRhs out;
	out.time = field.time;
	const auto T = field.phi.rows();
	out.rhs.resize(T);
	out.finite_difference.resize(T);
	const Eigen::VectorXd w = quadrature_weights(static_cast<std::size_t>(field.phi.cols()));
	double prev = 0.0;
	for (Eigen::Index t = 0; t < T; ++t)
	{
		const Eigen::VectorXd phi = field.phi.row(t).transpose();
		out.rhs(t) = rom_rhs_snapshot(phi, field.config, form);
		double bar = 0.0;
		for (Eigen::Index i = 0; i < phi.size(); ++i)
			bar += w(i) * indicator(phi(i)) * phi(i);
		out.finite_difference(t) = t == 0 ? std::numeric_limits<double>::quiet_NaN() :
											(bar - prev) / (field.time[static_cast<std::size_t>(t)] -
															   field.time[static_cast<std::size_t>(t - 1)]);
		prev = bar;
	}
	return out;
}

// ---------------------------------------------------------------------------
// Parameter sweeps.

/// The 16-trajectory dataset: M in {1e-3, 2e-3, 5e-3, 1e-2}, lambda in {0.5, 1}
/// and two cosine initial conditions, each seeded from (seed, trajectory index).
inline std::vector<Config> preset_paper16(std::uint64_t seed, std::size_t steps = 386, std::size_t nodes = 101)
{
	std::vector<Config> out;
	for (double M : {1e-3, 2e-3, 5e-3, 1e-2})
		for (double lam : {0.5, 1.0})
			for (int ic = 0; ic < 2; ++ic)
			{
				Config c;
				c.mobility = M;
				c.lambda = lam;
				c.steps = steps;
				c.nodes = nodes;
				c.initial = InitialCondition::cosine(derive_seed(seed, out.size()));
				out.push_back(c);
			}
	return out;
}

// ---------------------------------------------------------------------------
// Reduced-order model design.

/// Mobility terms v_a enter as v_a * (-dPsi/dphi); discrepancy terms enter bare.
struct RomBasis
{
	std::vector<regress::ModelTerm> mobility;
	std::vector<regress::ModelTerm> discrepancy;

	std::size_t size() const noexcept { return mobility.size() + discrepancy.size(); }
};

namespace detail
{

inline regress::ModelTerm product(std::vector<std::string> factors)
{
	std::string label;
	for (std::size_t i = 0; i < factors.size(); ++i)
		label += (i ? "*" : "") + factors[i];
	if (factors.empty())
		label = "1";
	return {label, [factors](const regress::Record& r) {
				double v = 1.0;
				for (const auto& name : factors)
				{
					auto it = r.find(name);
					if (it == r.end())
						throw SchemaError("record has no field '" + name + "'");
					v *= it->second;
				}
				return v;
			}};
}

} // namespace detail

/// The 36-term reference basis. Records carry every state column plus the
/// trajectory parameters M and lambda. Mobility block (6):
///   {1, M, lambda, phi1_p, phi2_p, F_p}.
/// Discrepancy block (30):
///   M x {1, phi1_p, phi2_p, phi3_p, phi4_p, phi1_m, phi2_m, phi3_m, F_m, absgrad1_p, absgrad2_p}
///   M lambda x {grad2_p, phi1grad2_p, phi1grad2_m, absgrad2_p}
///   {1, phi1_p, phi2_p, phi1_m, F_p, dF_p, grad2_p, absgrad2_p, Psi, lambda}
///   {M M, M phi1_p phi1_p, M phi1_p phi2_p, M Psi, lambda phi1_p}.
/// dF_p (= 4 phi3_p - 4 phi1_p) appears only without M so that no column is an
/// exact combination of others.
inline RomBasis ac36_basis()
{
	using detail::product;
	RomBasis b;
	b.mobility = {product({}), product({"M"}), product({"lambda"}), product({"phi1_p"}), product({"phi2_p"}),
		product({"F_p"})};
	for (const char* s : {"", "phi1_p", "phi2_p", "phi3_p", "phi4_p", "phi1_m", "phi2_m", "phi3_m", "F_m",
			 "absgrad1_p", "absgrad2_p"})
		b.discrepancy.push_back(*s ? product({"M", s}) : product({"M"}));
	for (const char* s : {"grad2_p", "phi1grad2_p", "phi1grad2_m", "absgrad2_p"})
		b.discrepancy.push_back(product({"M", "lambda", s}));
	for (const char* s : {"", "phi1_p", "phi2_p", "phi1_m", "F_p", "dF_p", "grad2_p", "absgrad2_p", "Psi", "lambda"})
		b.discrepancy.push_back(*s ? product({s}) : product({}));
	b.discrepancy.push_back(product({"M", "M"}));
	b.discrepancy.push_back(product({"M", "phi1_p", "phi1_p"}));
	b.discrepancy.push_back(product({"M", "phi1_p", "phi2_p"}));
	b.discrepancy.push_back(product({"M", "Psi"}));
	b.discrepancy.push_back(product({"lambda", "phi1_p"}));
	return b;
}

struct RomOptions
{
	std::string target = "phi1_p";
	std::string energy = "Psi";
	/// Accuracy of the 1D stencils over the target coordinate.
	int r = 2;
};

struct RomDesignReport
{
	/// (trajectory, time index) rows removed for an undefined chemical potential.
	std::vector<std::pair<std::size_t, std::size_t>> dropped;
};

/// Global chemical potential dPsi/dphi along one trajectory from 1D stencils
/// over the target coordinate; NaN where no stencil exists.
inline Eigen::VectorXd global_chemical_potential(const StateSeries& s, const RomOptions& opt = {})
{
	const Eigen::VectorXd coord = s.column(opt.target);
	const Eigen::VectorXd psi = s.column(opt.energy);
	const PointCloud cloud{Eigen::MatrixXd(coord)};
	StencilOptions so;
	so.skip_failures = true;
	const StencilSet st = build_stencil_set(cloud, opt.r, so);
	return first_derivative(st, FieldSamples{psi, opt.energy}, 0).values;
}

/// Rows: time levels 1.. of every trajectory; target: backward difference of the
/// target coordinate; columns: mobility terms times -dPsi/dphi, then the
/// discrepancy terms, all evaluated at the later time level.
inline regress::Design build_rom_design(const std::vector<StateSeries>& trajectories, const RomBasis& basis,
	const RomOptions& opt = {}, RomDesignReport* report = nullptr)
{
	if (trajectories.empty())
		throw DomainError("ROM design needs at least one trajectory");
	std::vector<regress::Record> records;
	std::vector<double> target;
	std::vector<int> groups;
	for (std::size_t tr = 0; tr < trajectories.size(); ++tr)
	{
		const auto& s = trajectories[tr];
		s.validate();
		const Eigen::VectorXd mu = global_chemical_potential(s, opt);
		const Eigen::VectorXd x = s.column(opt.target);
		for (std::size_t j = 1; j < s.size(); ++j)
		{
			const auto jj = static_cast<Eigen::Index>(j);
			if (!std::isfinite(mu(jj)))
			{
				if (report)
					report->dropped.emplace_back(tr, j);
				continue;
			}
			regress::Record r(s.parameters.begin(), s.parameters.end());
			for (std::size_t c = 0; c < s.names.size(); ++c)
				r[s.names[c]] = s.values(jj, static_cast<Eigen::Index>(c));
			r["dPsi_dphi"] = mu(jj);
			records.push_back(std::move(r));
			target.push_back((x(jj) - x(jj - 1)) / (s.time[j] - s.time[j - 1]));
			groups.push_back(static_cast<int>(tr));
		}
	}
	std::vector<regress::ModelTerm> terms;
	for (const auto& t : basis.mobility)
		terms.push_back({"M[" + t.label + "]", [ev = t.evaluate](const regress::Record& r) {
							 return -ev(r) * r.at("dPsi_dphi");
						 }});
	for (const auto& t : basis.discrepancy)
		terms.push_back(t);
	std::size_t row = 0;
	return regress::build_design(records, terms, [&](const regress::Record&) { return target[row++]; }, groups);
}

} // namespace nlgraph::allen_cahn
