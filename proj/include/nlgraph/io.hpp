#pragma once

#include "csv.hpp"
#include "errors.hpp"
#include "regress.hpp"
#include "stencil.hpp"
#include "taylor.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace nlgraph::io
{

using nlohmann::json;

// ---------------------------------------------------------------------------
// StencilSet. Doubles are written in shortest round-trip form, so a write/read
// cycle restores every value bit for bit.

inline json to_json(const StencilSet& set)
{
	json stencils = json::array();
	for (VertexId v : set.bases())
		for (int mu = 0; mu < set.dimension(); ++mu)
		{
			if (!set.has(v, mu))
				continue;
			const Stencil& s = set.at(v, mu);
			json offsets = json::array();
			for (Eigen::Index i = 0; i < s.neighborhood.offsets.rows(); ++i)
			{
				json row = json::array();
				for (Eigen::Index c = 0; c < s.neighborhood.offsets.cols(); ++c)
					row.push_back(s.neighborhood.offsets(i, c));
				offsets.push_back(std::move(row));
			}
			stencils.push_back({{"base", v}, {"mu", mu}, {"members", s.neighborhood.members}, {"offsets", offsets},
				{"weights", std::vector<double>(s.weights.begin(), s.weights.end())}, {"residual", s.residual}});
		}
	json failures = json::array();
	for (const auto& f : set.failures())
		failures.push_back({{"vertex", f.vertex}, {"mu", f.mu}, {"message", f.message}});
	return {{"dimension", set.dimension()}, {"accuracy", set.accuracy()}, {"vertex_count", set.vertex_count()},
		{"stencils", stencils}, {"failures", failures}};
}

inline StencilSet stencil_set_from_json(const json& j)
{
	try
	{
		const int p = j.at("dimension").get<int>();
		StencilSet set(p, j.at("accuracy").get<int>(), j.at("vertex_count").get<std::size_t>());
		for (const auto& e : j.at("stencils"))
		{
			Stencil s;
			s.accuracy = set.accuracy();
			s.neighborhood.base = e.at("base").get<VertexId>();
			s.neighborhood.mu = e.at("mu").get<int>();
			s.neighborhood.members = e.at("members").get<std::vector<VertexId>>();
			const auto& off = e.at("offsets");
			s.neighborhood.offsets.resize(static_cast<Eigen::Index>(off.size()), p);
			for (std::size_t i = 0; i < off.size(); ++i)
			{
				if (off[i].size() != static_cast<std::size_t>(p))
					throw SchemaError("stencil offset row has the wrong dimension");
				for (int c = 0; c < p; ++c)
					s.neighborhood.offsets(static_cast<Eigen::Index>(i), c) = off[i][static_cast<std::size_t>(c)].get<double>();
			}
			const auto w = e.at("weights").get<std::vector<double>>();
			if (w.size() != s.neighborhood.members.size() || off.size() != w.size())
				throw SchemaError("stencil members, offsets and weights differ in length");
			s.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
			s.residual = e.at("residual").get<double>();
			set.insert(std::move(s));
		}
		if (j.contains("failures"))
			for (const auto& f : j.at("failures"))
				set.record_failure({f.at("vertex").get<VertexId>(), f.at("mu").get<int>(), f.at("message").get<std::string>()});
		return set;
	}
	catch (const json::exception& e)
	{
		throw SchemaError(std::string("malformed stencil JSON: ") + e.what());
	}
}

// ---------------------------------------------------------------------------
// Stepwise results.

inline json to_json(const regress::StepwiseResult& r)
{
	json path = json::array();
	for (const auto& s : r.path)
	{
		json e{{"terms", s.terms}, {"coefficients", std::vector<double>(s.coefficients.begin(), s.coefficients.end())},
			{"loss", s.loss}};
		if (s.cv_loss)
		{
			e["cv_loss"] = *s.cv_loss;
			e["cv_fold_losses"] = s.cv_fold_losses;
		}
		path.push_back(std::move(e));
	}
	return {{"path", path}, {"solver", r.solver.kind == regress::Solver::Kind::ols ? "ols" : "ridge"},
		{"lambda", r.solver.effective_lambda()}, {"scale_columns", r.solver.scale_columns},
		{"loss_weights", {{"l1", r.loss.w1}, {"l2", r.loss.w2}, {"linf", r.loss.winf}}},
		{"per_sample", r.loss.per_sample}};
}

/// n_terms,loss[,cv_loss]
inline void write_loss_curve(std::ostream& out, const regress::StepwiseResult& r)
{
	const bool cv = !r.path.empty() && r.path.front().cv_loss.has_value();
	csv::Writer w(out);
	w.header(cv ? std::vector<std::string>{"n_terms", "loss", "cv_loss"} : std::vector<std::string>{"n_terms", "loss"});
	for (const auto& s : r.path)
	{
		std::vector<double> row{static_cast<double>(s.columns.size()), s.loss};
		if (cv)
			row.push_back(*s.cv_loss);
		w.row(row);
	}
}

// ---------------------------------------------------------------------------
// Error studies.

/// One row per mesh: h, m, the global model error, then per derivative index and
/// per coefficient order, absolute-mean and max-abs summaries.
inline void write_error_study(std::ostream& out, const std::vector<ErrorReport>& reports, const MultiIndexSet& indices)
{
	std::vector<std::string> header{"h", "m", "e_signed", "e_abs_mean", "e_max_abs"};
	for (std::size_t s = 0; s < indices.size(); ++s)
	{
		header.push_back("eps_" + indices[s].label() + "_abs_mean");
		header.push_back("eps_" + indices[s].label() + "_max_abs");
	}
	const std::size_t orders = reports.empty() ? 0 : reports.front().gamma_order.size();
	for (std::size_t l = 1; l <= orders; ++l)
		header.push_back("gamma_dev_" + std::to_string(l) + "_abs_mean");
	csv::Writer w(out);
	w.header(header);
	for (const auto& r : reports)
	{
		std::vector<double> row{r.h, static_cast<double>(r.m), r.model.signed_mean, r.model.abs_mean, r.model.max_abs};
		for (const auto& d : r.derivative)
		{
			row.push_back(d.abs_mean);
			row.push_back(d.max_abs);
		}
		for (const auto& g : r.gamma_order)
			row.push_back(g.abs_mean);
		w.row(row);
	}
}

inline void write_json(const std::string& path, const json& j)
{
	std::ofstream f(path);
	if (!f)
		throw InputError("cannot write " + path);
	f << j.dump(2) << '\n';
}

inline json read_json(const std::string& path)
{
	std::ifstream f(path);
	if (!f)
		throw InputError("cannot open " + path);
	try
	{
		return json::parse(f);
	}
	catch (const json::parse_error& e)
	{
		throw ParseError(std::string("invalid JSON in ") + path + ": " + e.what(), 0);
	}
}

} // namespace nlgraph::io
