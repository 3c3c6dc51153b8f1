/// Walks the pipeline on small problems: stencils and derivatives on a 2D
/// interlaced mesh, a Taylor surrogate evaluated at test vertices, and a short
/// Allen-Cahn dataset reduced to a sparse rate model.

#include <nlgraph/nlgraph.hpp>

#include <cmath>
#include <cstdio>

using namespace nlgraph;

int main()
{
	const auto cloud = generate_interlaced_mesh(2, 12, 1.0);
	Eigen::VectorXd u(static_cast<Eigen::Index>(cloud.size()));
	for (VertexId v = 0; v < cloud.size(); ++v)
	{
		const auto x = cloud.point(v);
		u(static_cast<Eigen::Index>(v)) = std::sin(2.0 * x(0)) * std::cos(x(1));
	}
	const FieldSamples field{u, "u"};

	const auto stencils = build_stencil_set(cloud, 4);
	std::printf("%zu train vertices, %zu first-derivative stencils (r = 4)\n", cloud.train_ids().size(), stencils.size());

	// D_x u and D_x D_y u against the analytic values.
	const auto dx = first_derivative(stencils, field, 0);
	const auto dxy = higher_derivative(stencils, field, std::vector<int>{0, 1});
	double ex = 0.0, exy = 0.0;
	for (VertexId v : cloud.train_ids())
	{
		const auto x = cloud.point(v);
		const auto i = static_cast<Eigen::Index>(v);
		ex = std::max(ex, std::abs(dx.values(i) - 2.0 * std::cos(2.0 * x(0)) * std::cos(x(1))));
		exy = std::max(exy, std::abs(dxy.values(i) + 2.0 * std::cos(2.0 * x(0)) * std::sin(x(1))));
	}
	std::printf("max error  D_x u: %.3e   D_x D_y u: %.3e\n", ex, exy);

	// Third-order surrogate from stencil derivatives, checked at test vertices.
	const auto model = fit_surrogate(cloud, stencils, field, 3);
	double em = 0.0;
	for (VertexId t : cloud.test_ids())
		em = std::max(em, std::abs(evaluate_surrogate(model, cloud.point(t)) - u(static_cast<Eigen::Index>(t))));
	std::printf("surrogate (k = 3) max error at %zu test vertices: %.3e\n", cloud.test_ids().size(), em);

	// Sparse rate model of the positive-phase fraction from 16 short trajectories.
	std::vector<StateSeries> data;
	for (const auto& c : allen_cahn::preset_paper16(1, 80))
		data.push_back(allen_cahn::extract_states(allen_cahn::solve(c)));
	const auto design = allen_cahn::build_rom_design(data, allen_cahn::ac36_basis());
	const auto path = regress::stepwise_eliminate(design, regress::LossSpec{}, regress::Solver::ols());
	for (std::size_t n : {1u, 2u, 3u, 36u})
	{
		const auto* step = path.with_terms(n);
		std::printf("%2zu terms: loss %.4e", n, step->loss);
		if (n <= 3)
			for (std::size_t j = 0; j < step->terms.size(); ++j)
				std::printf("  %+.4f %s", step->coefficients(static_cast<Eigen::Index>(j)), step->terms[j].c_str());
		std::printf("\n");
	}
	return 0;
}
