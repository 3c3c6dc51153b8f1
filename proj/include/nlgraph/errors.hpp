#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nlgraph
{

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

/// Malformed input: CSV/JSON that cannot be parsed, wrong schema, bad config.
class InputError : public Error
{
public:
	using Error::Error;
};

class ParseError : public InputError
{
public:
	ParseError(const std::string& what, std::size_t line)
		: InputError("line " + std::to_string(line) + ": " + what), line_(line)
	{
	}
	std::size_t line() const noexcept { return line_; }

private:
	std::size_t line_;
};

class SchemaError : public InputError
{
public:
	using InputError::InputError;
};

/// Time column of a state series is not strictly increasing.
class OrderingError : public InputError
{
public:
	using InputError::InputError;
};

class GroupingError : public InputError
{
public:
	using InputError::InputError;
};

/// Invalid loss specification (e.g. all weights zero).
class SpecError : public InputError
{
public:
	using InputError::InputError;
};

class DomainError : public InputError
{
public:
	using InputError::InputError;
};

/// Requested object would exceed a configured size limit.
class CapacityError : public Error
{
public:
	using Error::Error;
};

/// Failures of the numerical machinery (rank, conditioning, convergence).
class NumericalError : public Error
{
public:
	using Error::Error;
};

/// A neighbor has zero offset along the derivative dimension.
class AlignmentError : public NumericalError
{
public:
	AlignmentError(const std::string& what, std::size_t row)
		: NumericalError(what), row_(row)
	{
	}
	std::size_t row() const noexcept { return row_; }

private:
	std::size_t row_;
};

/// Candidate neighbors ran out before the moment matrix reached full rank.
class DegenerateGeometryError : public NumericalError
{
public:
	DegenerateGeometryError(const std::string& what, std::size_t vertex,
		std::size_t achieved_rank, std::size_t required_rank)
		: NumericalError(what), vertex_(vertex), achieved_(achieved_rank), required_(required_rank)
	{
	}
	std::size_t vertex() const noexcept { return vertex_; }
	std::size_t achieved_rank() const noexcept { return achieved_; }
	std::size_t required_rank() const noexcept { return required_; }

private:
	std::size_t vertex_;
	std::size_t achieved_;
	std::size_t required_;
};

class ConditioningError : public NumericalError
{
public:
	ConditioningError(const std::string& what, double residual = 0.0)
		: NumericalError(what), residual_(residual)
	{
	}
	double residual() const noexcept { return residual_; }

private:
	double residual_;
};

/// Nonlinear solver did not converge.
class SolverError : public NumericalError
{
public:
	SolverError(const std::string& what, std::size_t step)
		: NumericalError(what), step_(step)
	{
	}
	std::size_t step() const noexcept { return step_; }

private:
	std::size_t step_;
};

} // namespace nlgraph
