#include <nlgraph/nlgraph.hpp>

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

using namespace nlgraph;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace
{

/// Bad flag or config value; exit code 2.
class UsageError : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

/// An `--assert` check that did not hold; exit code 1.
class AssertionFailed : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

std::ofstream open_output(const fs::path& path)
{
	std::ofstream f(path, std::ios::binary);
	if (!f)
		throw InputError("cannot write '" + path.string() + "'");
	return f;
}

std::string key_of(std::string flag)
{
	for (char& c : flag)
		if (c == '-')
			c = '_';
	return flag;
}

/// Subcommand whose options may also come from a JSON config file. Keys use
/// underscores in place of dashes and may sit at the top level or inside an
/// object named after the subcommand.
class Command
{
public:
	Command(CLI::App& parent, const std::string& name, const std::string& help)
		: app_(parent.add_subcommand(name, help)), name_(name)
	{
		app_->add_option("--config", config_, "JSON file with option values; flags take precedence");
		add("out", out_, "Output directory");
		app_->callback([this] { selected_ = true; });
	}
	virtual ~Command() = default;

	bool selected() const noexcept { return selected_; }
	const std::string& name() const noexcept { return name_; }

	int execute()
	{
		merge_config();
		prepare();
		fs::create_directories(out_);
		io::write_json((fs::path(out_) / "config.json").string(), effective());
		return run();
	}

protected:
	template <typename T>
	CLI::Option* add(const std::string& flag, T& var, const std::string& help)
	{
		CLI::Option* opt = nullptr;
		if constexpr (std::is_same_v<T, bool>)
			opt = app_->add_flag("--" + flag, var, help);
		else
			opt = app_->add_option("--" + flag, var, help)->capture_default_str();
		bindings_.push_back({key_of(flag), opt, [&var](const json& j) { var = j.get<T>(); }, [&var] { return json(var); }});
		return opt;
	}

	bool given(const std::string& flag) const
	{
		for (const auto& b : bindings_)
			if (b.key == key_of(flag))
				return b.option->count() > 0 || b.from_config;
		return false;
	}

	fs::path out(const std::string& file) const { return fs::path(out_) / file; }

	/// Fills defaults that depend on other options and validates.
	virtual void prepare() {}
	virtual int run() = 0;

	CLI::App* app_;

private:
	struct Binding
	{
		std::string key;
		CLI::Option* option;
		std::function<void(const json&)> load;
		std::function<json()> save;
		bool from_config = false;
	};

	void merge_config()
	{
		if (config_.empty())
			return;
		json j = io::read_json(config_);
		if (!j.is_object())
			throw UsageError(config_ + ": top level must be an object");
		std::string prefix;
		if (j.contains(name_) && j[name_].is_object())
		{
			j = json(j[name_]);
			prefix = name_ + ".";
		}
		for (const auto& [key, value] : j.items())
		{
			if (key == "command")
				continue;
			auto it = std::find_if(bindings_.begin(), bindings_.end(), [&](const Binding& b) { return b.key == key_of(key); });
			if (it == bindings_.end())
				throw UsageError("config field '" + prefix + key + "': unknown option for '" + name_ + "'");
			if (it->option->count() > 0)
				continue;
			try
			{
				it->load(value);
				it->from_config = true;
			}
			catch (const json::exception&)
			{
				throw UsageError("config field '" + prefix + key + "': expected " + std::string(it->save().type_name()) +
					", got " + value.type_name());
			}
		}
	}

	json effective() const
	{
		json j;
		j["command"] = name_;
		for (const auto& b : bindings_)
			if (b.key != "out")
				j[b.key] = b.save();
		return j;
	}

	std::vector<Binding> bindings_;
	std::string name_;
	std::string config_;
	std::string out_ = "out";
	bool selected_ = false;
};

// ---------------------------------------------------------------------------
// Shared option groups.

struct MeshArgs
{
	int p = 1;
	long m = 8;
	double L = 1.0;
	std::string input;
};

class MeshCommand : public Command
{
public:
	using Command::Command;

protected:
	void add_mesh_options()
	{
		add("p", mesh_.p, "Spatial dimension of the generated mesh");
		add("m", mesh_.m, "Test intervals per dimension");
		add("L", mesh_.L, "Domain edge length");
		add("input", mesh_.input, "Point-cloud CSV (x0.., optional role, fields) instead of a generated mesh");
	}

	CloudData cloud() const
	{
		if (!mesh_.input.empty())
			return load_point_cloud(mesh_.input);
		return CloudData{generate_interlaced_mesh(mesh_.p, mesh_.m, mesh_.L), {}};
	}

	MeshArgs mesh_;
};

StencilOptions stencil_options(std::size_t extra, const std::string& counting, bool skip)
{
	StencilOptions o;
	o.extra_neighbors = extra;
	o.skip_failures = skip;
	if (counting == "unique")
		o.mode = CountingMode::unique;
	else if (counting == "non_unique")
		o.mode = CountingMode::non_unique;
	else
		throw UsageError("--counting must be 'unique' or 'non_unique'");
	return o;
}

ErrorNorm norm_of(const std::string& s, const std::string& flag)
{
	if (s == "abs_mean")
		return ErrorNorm::abs_mean;
	if (s == "max_abs")
		return ErrorNorm::max_abs;
	if (s == "signed_mean")
		return ErrorNorm::signed_mean;
	throw UsageError("--" + flag + " must be abs_mean, max_abs or signed_mean");
}

std::vector<long> default_meshes(int p, std::vector<long> one_d)
{
	if (p == 1)
		return one_d;
	if (p == 2)
		return {4, 8, 16, 32};
	return {4, 8, 16};
}

/// Trajectories from a manifest written by `allen-cahn`, or generated from the
/// 16-trajectory preset when no manifest is given.
struct DataArgs
{
	std::string input;
	std::uint64_t seed = 1;
	std::size_t steps = 386;
	std::size_t nodes = 101;
};

std::vector<StateSeries> load_manifest(const std::string& path)
{
	const json m = io::read_json(path);
	if (!m.contains("trajectories") || !m["trajectories"].is_array())
		throw SchemaError(path + ": manifest needs a 'trajectories' array");
	std::vector<StateSeries> out;
	const fs::path dir = fs::path(path).parent_path();
	for (std::size_t i = 0; i < m["trajectories"].size(); ++i)
	{
		const json& t = m["trajectories"][i];
		const std::string where = "trajectories[" + std::to_string(i) + "]";
		if (!t.contains("file") || !t["file"].is_string())
			throw SchemaError(path + ": " + where + ".file must be a string");
		StateSeries s = load_state_series((dir / t["file"].get<std::string>()).string());
		for (const char* p : {"M", "lambda"})
		{
			if (!t.contains(p) || !t[p].is_number())
				throw SchemaError(path + ": " + where + "." + p + " must be a number");
			s.parameters[p] = t[p].get<double>();
		}
		out.push_back(std::move(s));
	}
	if (out.empty())
		throw SchemaError(path + ": manifest lists no trajectories");
	return out;
}

std::vector<StateSeries> trajectories(const DataArgs& a)
{
	if (!a.input.empty())
		return load_manifest(a.input);
	std::vector<StateSeries> out;
	for (const auto& c : allen_cahn::preset_paper16(a.seed, a.steps, a.nodes))
		out.push_back(allen_cahn::extract_states(allen_cahn::solve(c)));
	return out;
}

regress::LossSpec loss_of(const std::string& kind, double w1, double w2, double winf, bool per_sample)
{
	regress::LossSpec l{0.0, 0.0, 0.0, per_sample};
	if (kind == "l1")
		l.w1 = 1.0;
	else if (kind == "l2")
		l.w2 = 1.0;
	else if (kind == "linf")
		l.winf = 1.0;
	else if (kind == "mixed")
	{
		l.w1 = w1;
		l.w2 = w2;
		l.winf = winf;
	}
	else
		throw UsageError("--loss must be l1, l2, linf or mixed");
	return l;
}

regress::Solver solver_of(const std::string& kind, double lambda)
{
	if (kind == "ols")
		return regress::Solver::ols();
	if (kind == "ridge")
		return regress::Solver::ridge(lambda);
	throw UsageError("--solver must be 'ols' or 'ridge'");
}

/// Loss and solver flags shared by the fitting commands.
struct FitArgs
{
	std::string loss = "l2";
	double w1 = 0.0;
	double w2 = 1.0;
	double winf = 0.0;
	bool raw_norms = false;
	std::string solver = "ols";
	double ridge_lambda = 1e-6;
};

class FitCommand : public Command
{
public:
	using Command::Command;

protected:
	void add_data_options()
	{
		add("input", data_.input, "Manifest JSON from 'allen-cahn'; omitted: generate the 16-trajectory preset");
		add("seed", data_.seed, "Seed of the generated preset");
		add("steps", data_.steps, "Time steps per generated trajectory");
		add("nodes", data_.nodes, "Grid nodes per generated trajectory");
		add("loss", fit_.loss, "l1, l2, linf, or mixed (uses --w1/--w2/--winf)");
		add("w1", fit_.w1, "Weight of the l1 norm for --loss mixed");
		add("w2", fit_.w2, "Weight of the l2 norm for --loss mixed");
		add("winf", fit_.winf, "Weight of the max norm for --loss mixed");
		add("raw-norms", fit_.raw_norms, "Use raw norms instead of per-sample (mean, root-mean-square) norms");
		add("solver", fit_.solver, "ols or ridge");
		add("ridge-lambda", fit_.ridge_lambda, "Ridge penalty on unit-RMS columns");
	}

	regress::LossSpec loss() const { return loss_of(fit_.loss, fit_.w1, fit_.w2, fit_.winf, !fit_.raw_norms); }
	regress::Solver solver() const { return solver_of(fit_.solver, fit_.ridge_lambda); }

	DataArgs data_;
	FitArgs fit_;
};

// ---------------------------------------------------------------------------
// Subcommands.

class Mesh final : public MeshCommand
{
public:
	explicit Mesh(CLI::App& app) : MeshCommand(app, "mesh", "Write an interlaced train/test mesh to points.csv")
	{
		add("p", mesh_.p, "Spatial dimension");
		add("m", mesh_.m, "Test intervals per dimension");
		add("L", mesh_.L, "Domain edge length");
	}

protected:
	int run() override
	{
		const auto cloud = generate_interlaced_mesh(mesh_.p, mesh_.m, mesh_.L);
		auto f = open_output(out("points.csv"));
		write_point_cloud(f, cloud);
		std::cout << cloud.size() << " points (" << cloud.train_ids().size() << " train) -> " << out("points.csv").string()
				  << "\n";
		return 0;
	}
};

class Stencils final : public MeshCommand
{
public:
	explicit Stencils(CLI::App& app) : MeshCommand(app, "stencil", "Build first-derivative stencils and write stencils.json")
	{
		add_mesh_options();
		add("r", r_, "Nominal accuracy");
		add("extra-neighbors", extra_, "Members beyond the constraint count (minimum-norm weights)");
		add("counting", counting_, "Constraint counting: unique or non_unique");
		add("skip-failures", skip_, "Record failing (vertex, dimension) pairs instead of stopping");
	}

protected:
	int run() override
	{
		const auto data = cloud();
		const auto set = build_stencil_set(data.cloud, r_, stencil_options(extra_, counting_, skip_));
		io::write_json(out("stencils.json").string(), io::to_json(set));
		std::cout << set.size() << " stencils, " << set.failures().size() << " failures -> "
				  << out("stencils.json").string() << "\n";
		return 0;
	}

private:
	int r_ = 2;
	std::size_t extra_ = 0;
	std::string counting_ = "unique";
	bool skip_ = false;
};

class Derivative final : public MeshCommand
{
public:
	explicit Derivative(CLI::App& app)
		: MeshCommand(app, "derivative", "Apply a non-local derivative to a field and write derivative.csv")
	{
		add_mesh_options();
		add("r", r_, "Nominal accuracy of the first-derivative stencils");
		add("dims", dims_, "Dimensions in application order, e.g. 0,1 for the mixed derivative")->delimiter(',');
		add("field", field_, "Field column of --input; omitted: a random polynomial of order --K");
		add("K", K_, "Order of the random polynomial field");
		add("seed", seed_, "Seed of the random polynomial field");
		add("extra-neighbors", extra_, "Members beyond the constraint count");
		add("sparse", sparse_, "Also write the operator as triplets to operator.csv");
	}

protected:
	void prepare() override
	{
		if (dims_.empty())
			throw UsageError("--dims needs at least one dimension");
	}

	int run() override
	{
		const auto data = cloud();
		const auto& c = data.cloud;
		std::optional<Polynomial> poly;
		FieldSamples u;
		if (!field_.empty())
		{
			auto it = data.fields.find(field_);
			if (it == data.fields.end())
				throw SchemaError("input has no field column '" + field_ + "'");
			u = {it->second, field_};
		}
		else
		{
			Rng rng(seed_);
			poly = Polynomial::random(c.dimension(), K_, rng);
			u = {poly->evaluate(c.points()), "u"};
		}
		const auto set = build_stencil_set(c, r_, stencil_options(extra_, "unique", false));
		const auto d = higher_derivative(set, u, dims_);
		std::optional<Polynomial> exact;
		if (poly)
			exact = poly->derivative(MultiIndex::from_dimensions(c.dimension(), dims_));

		std::vector<std::string> header;
		for (int k = 0; k < c.dimension(); ++k)
			header.push_back("x" + std::to_string(k));
		header.insert(header.end(), {"u", "d"});
		if (exact)
			header.insert(header.end(), {"exact", "error"});
		auto f = open_output(out("derivative.csv"));
		csv::Writer w(f);
		w.header(header);
		std::size_t rows = 0;
		for (VertexId v = 0; v < c.size(); ++v)
		{
			const auto i = static_cast<Eigen::Index>(v);
			if (!std::isfinite(d.values(i)))
				continue;
			std::vector<std::string> row;
			for (int k = 0; k < c.dimension(); ++k)
				row.push_back(csv::format_real(c.points()(i, k)));
			row.push_back(csv::format_real(u.values(i)));
			row.push_back(csv::format_real(d.values(i)));
			if (exact)
			{
				const double e = (*exact)(c.point(v));
				row.push_back(csv::format_real(e));
				row.push_back(csv::format_real(d.values(i) - e));
			}
			w.row(row);
			++rows;
		}
		std::cout << rows << " derivative values -> " << out("derivative.csv").string() << "\n";
		if (sparse_)
		{
			auto g = open_output(out("operator.csv"));
			write_triplets(g, as_sparse_operator(set, dims_));
		}
		return 0;
	}

private:
	int r_ = 2;
	std::vector<int> dims_{0};
	std::string field_;
	int K_ = 4;
	std::uint64_t seed_ = 1;
	std::size_t extra_ = 0;
	bool sparse_ = false;
};

class Convergence final : public Command
{
public:
	explicit Convergence(CLI::App& app)
		: Command(app, "convergence", "Error study under mesh refinement; writes errors.csv and slopes.json")
	{
		add("p", p_, "Spatial dimension (required)");
		add("k", cfg_.k, "Taylor order of the surrogate");
		add("r", cfg_.r, "Nominal accuracy of the stencils");
		add("K", cfg_.K, "Order of the random test polynomial");
		add("L", cfg_.L, "Domain edge length");
		add("meshes", cfg_.meshes, "Mesh parameters m; omitted: 8..128 (p = 1), 4..32 (p = 2), 4..16 otherwise")
			->delimiter(',');
		add("seed", cfg_.seed, "Seed of the random polynomial");
		add("full-dataset", cfg_.fit.full_dataset, "Fit the surrogate coefficients on every train vertex");
		add("extra-neighbors", cfg_.stencil.extra_neighbors, "Stencil members beyond the constraint count");
		add("model-norm", model_norm_, "Summary of the model error: abs_mean, max_abs or signed_mean");
		add("derivative-norm", derivative_norm_, "Summary of the derivative errors");
		add("assert", assert_, "Exit 1 when a slope misses its expected value by more than --tolerance");
		add("tolerance", tolerance_, "Allowed slope deviation for --assert");
	}

protected:
	void prepare() override
	{
		if (p_ < 1)
			throw UsageError("--p is required and must be at least 1");
		cfg_.p = p_;
		if (!given("meshes"))
			cfg_.meshes = default_meshes(p_, {8, 16, 32, 64, 128});
		norm_of(model_norm_, "model-norm");
		norm_of(derivative_norm_, "derivative-norm");
	}

	int run() override
	{
		const auto reports = error_study(study_polynomial(cfg_), cfg_);
		const auto indices = enumerate_multi_indices(cfg_.p, cfg_.k);
		{
			auto f = open_output(out("errors.csv"));
			io::write_error_study(f, reports, indices);
		}
		const auto sl = study_slopes(reports, norm_of(model_norm_, "model-norm"),
			norm_of(derivative_norm_, "derivative-norm"), ErrorNorm::abs_mean);

		auto check = [&](double slope, double want) { return std::isfinite(slope) && std::abs(slope - want) <= tolerance_; };
		bool all = true;
		json j;
		j["tolerance"] = tolerance_;
		const double want_model = cfg_.k + 1;
		j["model"] = {{"slope", sl.model}, {"expected", want_model}, {"pass", check(sl.model, want_model)}};
		all = all && check(sl.model, want_model);
		std::printf("model          slope %7.3f  expected %g\n", sl.model, want_model);
		j["derivatives"] = json::array();
		for (std::size_t s = 0; s < indices.size(); ++s)
		{
			const double want = cfg_.r + 1 - indices[s].order();
			const bool ok = check(sl.derivative[s], want);
			all = all && ok;
			j["derivatives"].push_back({{"index", indices[s].label()}, {"order", indices[s].order()},
				{"slope", sl.derivative[s]}, {"expected", want}, {"pass", ok}});
			std::printf("%-14s slope %7.3f  expected %g%s\n", indices[s].label().c_str(), sl.derivative[s], want,
				ok ? "" : "  MISS");
		}
		j["gamma_order"] = sl.gamma_order;
		j["pass"] = all;
		io::write_json(out("slopes.json").string(), j);
		if (assert_ && !all)
			throw AssertionFailed("at least one slope misses its expected value by more than " + std::to_string(tolerance_));
		return 0;
	}

private:
	int p_ = 0;
	ErrorStudyConfig cfg_;
	std::string model_norm_ = "abs_mean";
	std::string derivative_norm_ = "max_abs";
	bool assert_ = false;
	double tolerance_ = 0.3;
};

class GaussianBaseline final : public Command
{
public:
	explicit GaussianBaseline(CLI::App& app)
		: Command(app, "gaussian-baseline", "Gaussian-weight versus local-stencil derivative error; writes gaussian.csv")
	{
		add("p", p_, "Spatial dimension (1 or 2)");
		add("sigma", sigma_, "Gaussian width");
		add("r", r_, "Nominal accuracy of the local stencils");
		add("meshes", meshes_, "Mesh parameters m; omitted: 16..256 (p = 1), 8..32 (p = 2)")->delimiter(',');
		add("L", L_, "Domain edge length");
	}

protected:
	void prepare() override
	{
		if (p_ != 1 && p_ != 2)
			throw UsageError("--p must be 1 or 2");
		if (!given("meshes"))
			meshes_ = p_ == 1 ? std::vector<long>{16, 32, 64, 128, 256} : std::vector<long>{8, 16, 32};
	}

	int run() override
	{
		// Field sin(2x) + x^3 in 1D, sin(2x) cos(y) + x^2 y in 2D; derivative along x.
		auto field = [&](const Eigen::RowVectorXd& x) {
			return p_ == 1 ? std::sin(2 * x(0)) + x(0) * x(0) * x(0)
						   : std::sin(2 * x(0)) * std::cos(x(1)) + x(0) * x(0) * x(1);
		};
		auto dfield = [&](const Eigen::RowVectorXd& x) {
			return p_ == 1 ? 2 * std::cos(2 * x(0)) + 3 * x(0) * x(0)
						   : 2 * std::cos(2 * x(0)) * std::cos(x(1)) + 2 * x(0) * x(1);
		};
		std::vector<double> h, eg, el;
		auto f = open_output(out("gaussian.csv"));
		csv::Writer w(f);
		w.header({"h", "m", "e_gaussian", "e_local"});
		for (long m : meshes_)
		{
			const auto cloud = generate_interlaced_mesh(p_, m, L_);
			Eigen::VectorXd u(static_cast<Eigen::Index>(cloud.size())), du(u.size());
			for (VertexId v = 0; v < cloud.size(); ++v)
			{
				u(static_cast<Eigen::Index>(v)) = field(cloud.point(v));
				du(static_cast<Eigen::Index>(v)) = dfield(cloud.point(v));
			}
			const auto dg = gaussian_first_derivative(cloud, gaussian_weight_baseline(cloud, sigma_), u, 0);
			const auto dl = first_derivative(build_stencil_set(cloud, r_), {u, "u"}, 0).values;
			double a = 0.0, b = 0.0;
			for (VertexId v : cloud.train_ids())
			{
				a += std::abs(dg(static_cast<Eigen::Index>(v)) - du(static_cast<Eigen::Index>(v)));
				b += std::abs(dl(static_cast<Eigen::Index>(v)) - du(static_cast<Eigen::Index>(v)));
			}
			const auto n = static_cast<double>(cloud.train_ids().size());
			h.push_back(*cloud.length_scale());
			eg.push_back(a / n);
			el.push_back(b / n);
			w.row(std::vector<std::string>{csv::format_real(h.back()), std::to_string(m), csv::format_real(eg.back()), csv::format_real(el.back())});
		}
		const double sg = fit_slope(h, eg), sl = fit_slope(h, el);
		io::write_json(out("slopes.json").string(), {{"gaussian", sg}, {"local", sl}, {"sigma", sigma_}, {"r", r_}});
		std::printf("gaussian slope %.3f, local (r = %d) slope %.3f\n", sg, r_, sl);
		return 0;
	}

private:
	int p_ = 1;
	double sigma_ = 0.1;
	int r_ = 2;
	std::vector<long> meshes_;
	double L_ = 1.0;
};

class AllenCahn final : public Command
{
public:
	explicit AllenCahn(CLI::App& app)
		: Command(app, "allen-cahn", "Simulate Allen-Cahn trajectories; writes trajectory CSVs and manifest.json")
	{
		add("preset", preset_, "'paper16' for the 16-trajectory dataset; empty for one configured run");
		add("seed", seed_, "Seed of the initial conditions");
		add("M", cfg_.mobility, "Mobility");
		add("lambda", cfg_.lambda, "Gradient energy coefficient");
		add("dt", cfg_.dt, "Time step");
		add("steps", cfg_.steps, "Time steps");
		add("nodes", cfg_.nodes, "Grid nodes");
		add("length", cfg_.length, "Domain length");
		add("ic", ic_, "Initial condition: cosine, tanh or constant");
		add("ic-value", ic_value_, "Constant level, or the mean of the cosine series");
		add("ic-center", ic_center_, "Interface position of the tanh profile");
		add("ic-width", ic_width_, "Interface width of the tanh profile");
		add("modes", modes_, "Cosine modes");
		add("amplitude", amplitude_, "Cosine amplitude bound");
	}

protected:
	void prepare() override
	{
		if (!preset_.empty() && preset_ != "paper16")
			throw UsageError("--preset must be 'paper16' or empty");
		if (ic_ == "cosine")
			cfg_.initial = allen_cahn::InitialCondition::cosine(seed_, modes_, amplitude_, ic_value_);
		else if (ic_ == "tanh")
			cfg_.initial = allen_cahn::InitialCondition::tanh_profile(ic_center_, ic_width_);
		else if (ic_ == "constant")
			cfg_.initial = allen_cahn::InitialCondition::constant(ic_value_);
		else
			throw UsageError("--ic must be cosine, tanh or constant");
	}

	int run() override
	{
		std::vector<allen_cahn::Config> runs;
		if (preset_ == "paper16")
		{
			runs = allen_cahn::preset_paper16(seed_, cfg_.steps, cfg_.nodes);
			for (auto& c : runs)
			{
				c.dt = cfg_.dt;
				c.length = cfg_.length;
			}
		}
		else
			runs.push_back(cfg_);
		json manifest;
		manifest["preset"] = preset_;
		manifest["seed"] = seed_;
		manifest["trajectories"] = json::array();
		for (std::size_t i = 0; i < runs.size(); ++i)
		{
			const auto& c = runs[i];
			const std::string name = (i < 10 ? "trajectory_0" : "trajectory_") + std::to_string(i) + ".csv";
			const auto states = allen_cahn::extract_states(allen_cahn::solve(c));
			auto f = open_output(out(name));
			write_state_series(f, states);
			manifest["trajectories"].push_back({{"file", name}, {"M", c.mobility}, {"lambda", c.lambda}, {"dt", c.dt},
				{"steps", c.steps}, {"nodes", c.nodes}, {"length", c.length}, {"ic_seed", c.initial.seed}});
		}
		io::write_json(out("manifest.json").string(), manifest);
		std::cout << runs.size() << " trajectories -> " << out("manifest.json").string() << "\n";
		return 0;
	}

private:
	std::string preset_;
	std::uint64_t seed_ = 1;
	allen_cahn::Config cfg_;
	std::string ic_ = "cosine";
	double ic_value_ = 0.0;
	double ic_center_ = 0.5;
	double ic_width_ = 0.05;
	int modes_ = 6;
	double amplitude_ = 1.0;
};

class RomFit final : public FitCommand
{
public:
	explicit RomFit(CLI::App& app)
		: FitCommand(app, "rom-fit", "Stepwise reduced-order model discovery; writes stepwise.json and loss_curve.csv")
	{
		add_data_options();
		add("basis", basis_, "Candidate basis (ac36)");
		add("cv", cv_, "Leave-one-trajectory-out cross-validation at every step");
		add("target", rom_.target, "State coordinate whose rate is modelled");
		add("energy", rom_.energy, "Energy column differentiated for the chemical potential");
		add("r", rom_.r, "Nominal accuracy of the chemical-potential stencils");
	}

protected:
	void prepare() override
	{
		if (basis_ != "ac36")
			throw UsageError("--basis must be 'ac36'");
		loss();
		solver();
	}

	int run() override
	{
		const auto data = trajectories(data_);
		allen_cahn::RomDesignReport rep;
		const auto d = allen_cahn::build_rom_design(data, allen_cahn::ac36_basis(), rom_, &rep);
		regress::StepwiseOptions opt;
		opt.cross_validate = cv_;
		const auto res = regress::stepwise_eliminate(d, loss(), solver(), opt);
		json j = io::to_json(res);
		j["design"] = {{"rows", d.rows()}, {"columns", d.cols()}, {"dropped_rows", rep.dropped.size()},
			{"trajectories", data.size()}};
		io::write_json(out("stepwise.json").string(), j);
		{
			auto f = open_output(out("loss_curve.csv"));
			io::write_loss_curve(f, res);
		}
		std::cout << "design " << d.rows() << " x " << d.cols() << " (" << rep.dropped.size() << " rows dropped)\n";
		for (std::size_t n = 1; n <= std::min<std::size_t>(5, res.path.size()); ++n)
		{
			const auto* s = res.with_terms(n);
			std::printf("%zu terms  loss %.6e ", n, s->loss);
			for (const auto& t : s->terms)
				std::printf(" %s", t.c_str());
			std::printf("\n");
		}
		return 0;
	}

private:
	std::string basis_ = "ac36";
	bool cv_ = false;
	allen_cahn::RomOptions rom_;
};

class TaylorFit final : public FitCommand
{
public:
	explicit TaylorFit(CLI::App& app)
		: FitCommand(app, "taylor-fit", "Non-local Taylor models of a state functional; writes taylor_losses.csv")
	{
		add_data_options();
		add("coords", opt_.coordinates, "State coordinates of the Taylor expansion")->delimiter(',');
		add("target", opt_.target, "State functional being expanded");
		add("order", opt_.max_order, "Highest Taylor order");
		add("r", opt_.r, "Nominal accuracy of the state-cloud stencils");
	}

protected:
	void prepare() override
	{
		if (opt_.coordinates.empty())
			throw UsageError("--coords needs at least one state coordinate");
		loss();
		solver();
	}

	int run() override
	{
		const auto data = trajectories(data_);
		const auto d = state_taylor_designs(data, opt_);
		const auto losses = state_taylor_losses(d, loss(), solver());
		auto f = open_output(out("taylor_losses.csv"));
		csv::Writer w(f);
		w.header({"order", "n_terms", "loss"});
		for (std::size_t k = 0; k < losses.size(); ++k)
		{
			w.row(std::vector<std::string>{std::to_string(k + 1), std::to_string(d.designs[k].cols()), csv::format_real(losses[k])});
			std::printf("order %zu  %3ld terms  loss %.6e\n", k + 1, static_cast<long>(d.designs[k].cols()), losses[k]);
		}
		std::cout << d.rows.size() << " rows, " << d.dropped << " dropped\n";
		return 0;
	}

private:
	StateTaylorOptions opt_{{"phi1_p"}, "Psi", 4, 2};
};

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"Non-local calculus on graphs: stencils, Taylor surrogates and model discovery"};
	app.require_subcommand(1);
	std::vector<std::unique_ptr<Command>> commands;
	commands.push_back(std::make_unique<Mesh>(app));
	commands.push_back(std::make_unique<Stencils>(app));
	commands.push_back(std::make_unique<Derivative>(app));
	commands.push_back(std::make_unique<Convergence>(app));
	commands.push_back(std::make_unique<GaussianBaseline>(app));
	commands.push_back(std::make_unique<AllenCahn>(app));
	commands.push_back(std::make_unique<RomFit>(app));
	commands.push_back(std::make_unique<TaylorFit>(app));

	try
	{
		app.parse(argc, argv);
	}
	catch (const CLI::ParseError& e)
	{
		return app.exit(e) == 0 ? 0 : 2;
	}

	for (auto& cmd : commands)
	{
		if (!cmd->selected())
			continue;
		const std::string who = "nlgraph-cli " + cmd->name() + ": ";
		try
		{
			return cmd->execute();
		}
		catch (const AssertionFailed& e)
		{
			std::cerr << who << "assertion failed: " << e.what() << "\n";
			return 1;
		}
		catch (const UsageError& e)
		{
			std::cerr << who << "usage error: " << e.what() << "\n";
			return 2;
		}
		catch (const InputError& e)
		{
			std::cerr << who << "input error: " << e.what() << "\n";
			return 2;
		}
		catch (const CapacityError& e)
		{
			std::cerr << who << "capacity error: " << e.what() << "\n";
			return 2;
		}
		catch (const NumericalError& e)
		{
			std::cerr << who << "numerical failure: " << e.what() << "\n";
			return 3;
		}
		catch (const fs::filesystem_error& e)
		{
			std::cerr << who << "input error: " << e.what() << "\n";
			return 2;
		}
		catch (const std::exception& e)
		{
			std::cerr << who << "failure: " << e.what() << "\n";
			return 3;
		}
	}
	return 2;
}
