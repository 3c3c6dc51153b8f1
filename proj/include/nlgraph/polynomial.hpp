#pragma once

#include "errors.hpp"
#include "poly_basis.hpp"
#include "random.hpp"

#include <Eigen/Dense>

#include <vector>

namespace nlgraph
{

/// Multivariate polynomial sum_s alpha_s x^s with analytic derivatives.
class Polynomial
{
public:
	struct Term
	{
		MultiIndex exponent;
		double coefficient;
	};

	Polynomial(int p, std::vector<Term> terms) : p_(p), terms_(std::move(terms))
	{
		for (const auto& t : terms_)
			if (t.exponent.dimension() != p_)
				throw DomainError("polynomial term dimension mismatch");
	}

	/// All monomials of total order 0..K with alpha ~ U[-1, 1]; the constant
	/// comes first, then the graded order of enumerate_multi_indices.
	static Polynomial random(int p, int K, Rng& rng)
	{
		std::vector<Term> terms;
		terms.push_back({MultiIndex(std::vector<int>(static_cast<std::size_t>(p), 0)), rng.uniform(-1.0, 1.0)});
		for (const auto& m : enumerate_multi_indices(p, K).indices)
			terms.push_back({m, rng.uniform(-1.0, 1.0)});
		return Polynomial(p, std::move(terms));
	}

	int dimension() const noexcept { return p_; }
	const std::vector<Term>& terms() const noexcept { return terms_; }

	template <typename Vec>
	double operator()(const Vec& x) const
	{
		double s = 0.0;
		for (const auto& t : terms_)
			s += t.coefficient * t.exponent.monomial(x);
		return s;
	}

	/// Values at every row of `points`.
	Eigen::VectorXd evaluate(const Eigen::MatrixXd& points) const
	{
		Eigen::VectorXd v(points.rows());
		for (Eigen::Index i = 0; i < points.rows(); ++i)
			v(i) = (*this)(points.row(i));
		return v;
	}

	/// Exact partial derivative for the multi-index `a`.
	Polynomial derivative(const MultiIndex& a) const
	{
		std::vector<Term> out;
		for (const auto& t : terms_)
		{
			std::vector<int> e = t.exponent.exponents();
			double c = t.coefficient;
			bool zero = false;
			for (int d = 0; d < p_ && !zero; ++d)
			{
				for (int k = 0; k < a[d]; ++k)
				{
					if (e[static_cast<std::size_t>(d)] == 0)
					{
						zero = true;
						break;
					}
					c *= e[static_cast<std::size_t>(d)]--;
				}
			}
			if (!zero)
				out.push_back({MultiIndex(std::move(e)), c});
		}
		return Polynomial(p_, std::move(out));
	}

private:
	int p_;
	std::vector<Term> terms_;
};

} // namespace nlgraph
