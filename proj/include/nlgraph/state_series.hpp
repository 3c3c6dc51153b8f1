#pragma once

#include "csv.hpp"
#include "errors.hpp"

#include <Eigen/Dense>

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace nlgraph
{

enum class Provenance
{
	generated,
	ingested
};

/// Named functionals of a trajectory sampled at strictly increasing times.
struct StateSeries
{
	std::vector<double> time;
	std::vector<std::string> names;
	Eigen::MatrixXd values; // time x column
	/// Scalar parameters of the trajectory (e.g. mobility, gradient coefficient).
	std::map<std::string, double> parameters;
	Provenance provenance = Provenance::generated;

	std::size_t size() const noexcept { return time.size(); }

	int find(const std::string& name) const
	{
		for (std::size_t i = 0; i < names.size(); ++i)
			if (names[i] == name)
				return static_cast<int>(i);
		return -1;
	}

	Eigen::VectorXd column(const std::string& name) const
	{
		const int c = find(name);
		if (c < 0)
			throw SchemaError("state series has no column '" + name + "'");
		return values.col(c);
	}

	void validate() const
	{
		if (static_cast<Eigen::Index>(time.size()) != values.rows() ||
			static_cast<Eigen::Index>(names.size()) != values.cols())
			throw SchemaError("state series column lengths do not match the time axis");
		for (std::size_t i = 1; i < time.size(); ++i)
			if (!(time[i] > time[i - 1]))
				throw OrderingError("time must be strictly increasing (row " + std::to_string(i) + ")");
	}
};

/// CSV with `t` first, then named columns.
inline StateSeries load_state_series(const csv::Table& table)
{
	if (table.header.empty() || (table.header.front() != "t" && table.header.front() != "time"))
		throw SchemaError("state series CSV must start with a 't' column");
	StateSeries s;
	s.provenance = Provenance::ingested;
	s.names.assign(table.header.begin() + 1, table.header.end());
	s.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(s.names.size()));
	for (std::size_t i = 0; i < table.rows.size(); ++i)
	{
		const auto& row = table.rows[i];
		s.time.push_back(csv::parse_real(row[0], table.lines[i]));
		for (std::size_t c = 0; c < s.names.size(); ++c)
			s.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
				csv::parse_real(row[c + 1], table.lines[i]);
	}
	s.validate();
	return s;
}

inline StateSeries load_state_series(const std::string& path)
{
	return load_state_series(csv::read_file(path));
}

inline void write_state_series(std::ostream& out, const StateSeries& s)
{
	std::vector<std::string> header{"t"};
	header.insert(header.end(), s.names.begin(), s.names.end());
	csv::Writer w(out);
	w.header(header);
	std::vector<double> row(s.names.size() + 1);
	for (std::size_t i = 0; i < s.size(); ++i)
	{
		row[0] = s.time[i];
		for (std::size_t c = 0; c < s.names.size(); ++c)
			row[c + 1] = s.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
		w.row(row);
	}
}

} // namespace nlgraph
