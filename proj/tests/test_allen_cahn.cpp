#include <nlgraph/allen_cahn.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace nlgraph;
using namespace nlgraph::allen_cahn;

namespace
{

double state(const StateSeries& s, std::size_t t, const std::string& name)
{
	return s.values(static_cast<Eigen::Index>(t), s.find(name));
}

Config small(InitialCondition ic, std::size_t steps = 20)
{
	Config c;
	c.initial = ic;
	c.steps = steps;
	return c;
}

} // namespace

TEST(FreeEnergy, DensityAndDerivatives)
{
	EXPECT_DOUBLE_EQ(f(0.0), 1.0);
	EXPECT_DOUBLE_EQ(f(1.0), 0.0);
	EXPECT_DOUBLE_EQ(f(-1.0), 0.0);
	for (double p : {-1.3, -0.2, 0.4, 0.9})
	{
		const double e = 1e-6;
		EXPECT_NEAR(df(p), (f(p + e) - f(p - e)) / (2 * e), 1e-6);
		EXPECT_NEAR(d2f(p), (df(p + e) - df(p - e)) / (2 * e), 1e-6);
	}
	EXPECT_EQ(indicator(0.0), 1.0);
	EXPECT_EQ(indicator(-1e-300), 0.0);
}

TEST(Solver, PureStatesAreStationary)
{
	for (double v : {1.0, -1.0, 0.0})
	{
		const auto field = solve(small(InitialCondition::constant(v)));
		EXPECT_EQ(field.phi.rows(), 21);
		EXPECT_LT((field.phi.array() - v).abs().maxCoeff(), 1e-14) << v;
	}
}

TEST(Solver, EnergyIsDissipated)
{
	for (const auto& ic : {InitialCondition::tanh_profile(0.4, 0.1), InitialCondition::cosine(5)})
	{
		Config c = small(ic, 300);
		c.mobility = 1e-2;
		c.lambda = 0.01;
		const auto s = extract_states(solve(c));
		for (std::size_t t = 1; t < s.size(); ++t)
			EXPECT_LE(state(s, t, "Psi"), state(s, t - 1, "Psi") + 1e-14) << t;
		EXPECT_LT(state(s, 300, "Psi"), state(s, 0, "Psi"));
	}
}

TEST(Solver, TimeAxisAndValidation)
{
	const auto field = solve(small(InitialCondition::cosine(2), 5));
	ASSERT_EQ(field.time.size(), 6u);
	EXPECT_DOUBLE_EQ(field.time[5], 0.05);
	EXPECT_DOUBLE_EQ(field.x(100), 1.0);
	Config bad = small(InitialCondition::cosine(2));
	bad.dt = 0.0;
	EXPECT_THROW(solve(bad), DomainError);
	bad = small(InitialCondition::cosine(2));
	bad.nodes = 2;
	EXPECT_THROW(solve(bad), DomainError);
}

TEST(Solver, NewtonFailureReportsStep)
{
	Config c = small(InitialCondition::cosine(3));
	c.newton_max_iterations = 1;
	try
	{
		solve(c);
		FAIL();
	}
	catch (const SolverError& e)
	{
		EXPECT_EQ(e.step(), 1u);
	}
}

TEST(Solver, SecondOrderSpatialOperator)
{
	// Stationary profile tanh(a (x - c)) with a = sqrt(2 / lambda): the discrete
	// residual f'(phi) - lambda lap(phi) at interior nodes shrinks like dx^2.
	const double lambda = 0.01, a = std::sqrt(2.0 / lambda);
	std::vector<double> err;
	for (std::size_t n : {101u, 201u, 401u, 801u})
	{
		Config c;
		c.nodes = n;
		c.lambda = lambda;
		const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(n), 0.0, 1.0);
		const Eigen::VectorXd phi = ((x.array() - 0.5) * a).tanh();
		const Eigen::VectorXd r = phi.unaryExpr(&df) - lambda * laplacian(phi, c.dx());
		err.push_back(r.segment(1, r.size() - 2).lpNorm<Eigen::Infinity>());
	}
	for (std::size_t i = 1; i < err.size(); ++i)
		EXPECT_NEAR(std::log2(err[i - 1] / err[i]), 2.0, 0.1);
}

TEST(States, ConstantFields)
{
	Config c;
	const auto zero = snapshot_states(Eigen::VectorXd::Zero(101), c);
	const auto one = snapshot_states(Eigen::VectorXd::Ones(101), c);
	const auto names = state_names();
	auto at = [&](const Eigen::RowVectorXd& v, const std::string& n) {
		return v(std::find(names.begin(), names.end(), n) - names.begin());
	};
	EXPECT_NEAR(at(zero, "Psi"), 1.0, 1e-14);
	EXPECT_NEAR(at(one, "Psi"), 0.0, 1e-14);
	EXPECT_NEAR(at(one, "phi1_p"), 1.0, 1e-14);
	EXPECT_EQ(at(one, "phi1_m"), 0.0);
	EXPECT_NEAR(at(one, "phi0_p"), 1.0, 1e-14);
	EXPECT_EQ(at(one, "grad2_p"), 0.0);
	EXPECT_EQ(at(one, "absgrad1_p"), 0.0);
	const auto minus = snapshot_states(-Eigen::VectorXd::Ones(101), c);
	EXPECT_NEAR(at(minus, "phi1_m"), -1.0, 1e-14);
	EXPECT_NEAR(at(minus, "phi0_m"), 1.0, 1e-14);
	EXPECT_EQ(names.size(), static_cast<std::size_t>(one.size()));
}

TEST(States, AntisymmetricProfileSplitsEvenly)
{
	Config c;
	c.nodes = 100; // no node at the interface
	const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(100, 0.0, 1.0);
	const Eigen::VectorXd phi = ((x.array() - 0.5) / 0.1).tanh();
	const StateSeries s = [&] {
		StateSeries r;
		r.time = {0.0};
		r.names = state_names();
		r.values = snapshot_states(phi, c);
		return r;
	}();
	EXPECT_NEAR(state(s, 0, "F_p"), state(s, 0, "F_m"), 1e-12);
	EXPECT_NEAR(state(s, 0, "phi1_p"), -state(s, 0, "phi1_m"), 1e-12);
	EXPECT_NEAR(state(s, 0, "phi0_p"), 0.5, 1e-12);
}

TEST(States, IndicatorSplitConservesMean)
{
	const auto field = solve(small(InitialCondition::cosine(9), 30));
	const auto s = extract_states(field);
	const Eigen::VectorXd w = quadrature_weights(101);
	for (std::size_t t = 0; t < s.size(); ++t)
	{
		const double mean = w.dot(field.phi.row(static_cast<Eigen::Index>(t)).transpose());
		EXPECT_NEAR(state(s, t, "phi1_p") + state(s, t, "phi1_m"), mean, 1e-13);
		EXPECT_NEAR(state(s, t, "phi0_p") + state(s, t, "phi0_m"), 1.0, 1e-13);
	}
	EXPECT_EQ(s.parameters.at("M"), 1e-3);
	EXPECT_EQ(s.provenance, Provenance::generated);
}

TEST(ReducedRhs, ConstantFieldValues)
{
	Config c;
	c.mobility = 2e-3;
	EXPECT_EQ(rom_rhs_snapshot(Eigen::VectorXd::Ones(101), c, RomForm::printed), 0.0);
	EXPECT_NEAR(rom_rhs_snapshot(Eigen::VectorXd::Constant(101, 0.5), c, RomForm::printed), 0.75 * 2e-3, 1e-15);
	EXPECT_NEAR(rom_rhs_snapshot(Eigen::VectorXd::Constant(101, 0.5), c, RomForm::consistent), 1.5 * 2e-3, 1e-15);
	EXPECT_EQ(rom_rhs_snapshot(Eigen::VectorXd::Constant(101, -0.5), c, RomForm::printed), 0.0);
}

TEST(ReducedRhs, ConsistentFormMatchesDiscreteDynamics)
{
	// A strictly positive field never crosses the indicator threshold, so the
	// backward difference of phi_1+ equals the consistent right-hand side.
	Config c = small(InitialCondition::cosine(4, 6, 0.3, 0.6), 50);
	c.mobility = 5e-3;
	const auto field = solve(c);
	ASSERT_GT(field.phi.minCoeff(), 0.0);
	const auto rhs = exact_rom_rhs(field, RomForm::consistent);
	EXPECT_TRUE(std::isnan(rhs.finite_difference(0)));
	for (Eigen::Index t = 1; t < rhs.rhs.size(); ++t)
		EXPECT_NEAR(rhs.finite_difference(t), rhs.rhs(t), 1e-8 + 1e-6 * std::abs(rhs.rhs(t)));
	const auto printed = exact_rom_rhs(field, RomForm::printed);
	EXPECT_GT((printed.rhs - rhs.rhs).lpNorm<Eigen::Infinity>(), 1e-5);
}

TEST(Preset, SixteenDistinctTrajectories)
{
	const auto cfgs = preset_paper16(1);
	ASSERT_EQ(cfgs.size(), 16u);
	std::set<std::uint64_t> seeds;
	for (const auto& c : cfgs)
	{
		seeds.insert(c.initial.seed);
		EXPECT_EQ(c.steps, 386u);
	}
	EXPECT_EQ(seeds.size(), 16u);
	EXPECT_EQ(cfgs[0].initial.seed, preset_paper16(1)[0].initial.seed);
	EXPECT_NE(cfgs[0].initial.seed, preset_paper16(2)[0].initial.seed);
}

TEST(RomDesign, ReferenceBasisHasThirtySixColumns)
{
	const auto b = ac36_basis();
	EXPECT_EQ(b.size(), 36u);
	std::vector<StateSeries> tr;
	for (const auto& c : preset_paper16(1, 30))
		tr.push_back(extract_states(solve(c)));
	RomDesignReport rep;
	const auto d = build_rom_design(tr, b, {}, &rep);
	EXPECT_EQ(d.cols(), 36);
	EXPECT_EQ(static_cast<std::size_t>(d.rows()) + rep.dropped.size(), 16u * 30u);
	EXPECT_EQ(d.labels.front(), "M[1]");
	EXPECT_EQ(d.labels[6], "M");
	std::set<std::string> unique(d.labels.begin(), d.labels.end());
	EXPECT_EQ(unique.size(), 36u);
}

TEST(RomDesign, ChemicalPotentialDrivenSeries)
{
	// Psi = 3 phi: the chemical potential is exactly 3 and the series decays as
	// d phi/dt = -2 dPsi/dphi, so the mobility coefficient is 2.
	StateSeries s;
	s.names = {"phi1_p", "Psi"};
	s.values.resize(40, 2);
	for (int j = 0; j < 40; ++j)
	{
		s.time.push_back(0.1 * j);
		s.values(j, 0) = 1.0 - 0.6 * j;
		s.values(j, 1) = 3.0 * s.values(j, 0);
	}
	RomBasis b;
	b.mobility = {allen_cahn::detail::product({})};
	const auto d = build_rom_design({s}, b);
	EXPECT_EQ(d.rows(), 39);
	EXPECT_NEAR(regress::fit_ols(d)(0), 2.0, 1e-10);

	s.values.col(1).setConstant(0.25);
	const auto flat = build_rom_design({s}, b);
	EXPECT_LT(flat.X.cwiseAbs().maxCoeff(), 1e-12);
}
