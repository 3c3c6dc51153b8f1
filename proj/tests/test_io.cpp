#include <nlgraph/io.hpp>
#include <nlgraph/random.hpp>
#include <nlgraph/state_series.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <sstream>

using namespace nlgraph;

namespace
{

csv::Table parse(const std::string& text)
{
	std::istringstream in(text);
	return csv::read(in);
}

bool bit_equal(double a, double b)
{
	return std::memcmp(&a, &b, sizeof a) == 0;
}

} // namespace

TEST(StateSeriesIo, LoadsThreeRows)
{
	const auto s = load_state_series(parse("t,Psi,phi1_p\n0,1.0,0.2\n0.5,0.9,0.25\n1.0,0.85,0.3\n"));
	EXPECT_EQ(s.size(), 3u);
	EXPECT_EQ(s.names, (std::vector<std::string>{"Psi", "phi1_p"}));
	EXPECT_DOUBLE_EQ(s.column("phi1_p")(2), 0.3);
	EXPECT_EQ(s.provenance, Provenance::ingested);
	EXPECT_THROW(s.column("nope"), SchemaError);
}

TEST(StateSeriesIo, RejectsUnorderedTime)
{
	EXPECT_THROW(load_state_series(parse("t,Psi\n0,1\n0.2,1\n0.1,1\n")), OrderingError);
	EXPECT_THROW(load_state_series(parse("t,Psi\n0,1\n0,1\n")), OrderingError);
	EXPECT_THROW(load_state_series(parse("Psi,t\n1,0\n")), SchemaError);
	try
	{
		load_state_series(parse("t,Psi\n0,1\n1,x\n"));
		FAIL();
	}
	catch (const ParseError& e)
	{
		EXPECT_EQ(e.line(), 3u);
	}
}

TEST(StateSeriesIo, MicrostructureShapedColumnsAreAddressable)
{
	const auto s = load_state_series(
		parse("t,Psi,Psi_mech,E_bar,phi_alpha,l_alpha,N_alpha\n0,1,0.1,0.01,0.3,0.2,4\n1,0.8,0.09,0.011,0.35,0.21,3\n"));
	regress::Record r;
	for (std::size_t c = 0; c < s.names.size(); ++c)
		r[s.names[c]] = s.values(1, static_cast<Eigen::Index>(c));
	EXPECT_EQ(r.size(), 6u);
	EXPECT_DOUBLE_EQ(r.at("N_alpha"), 3.0);
	EXPECT_DOUBLE_EQ(r.at("Psi_mech"), 0.09);
}

TEST(StateSeriesIo, WriteReadRoundTrip)
{
	StateSeries s;
	s.names = {"Psi", "x"};
	s.values.resize(4, 2);
	Rng rng(3);
	for (int i = 0; i < 4; ++i)
	{
		s.time.push_back(0.1 * i + 1e-17);
		s.values(i, 0) = rng.uniform(-1, 1) * 1e-7;
		s.values(i, 1) = rng.uniform(-1, 1) * 1e9;
	}
	std::ostringstream out;
	write_state_series(out, s);
	const auto back = load_state_series(parse(out.str()));
	ASSERT_EQ(back.size(), 4u);
	for (int i = 0; i < 4; ++i)
	{
		EXPECT_TRUE(bit_equal(back.time[static_cast<std::size_t>(i)], s.time[static_cast<std::size_t>(i)]));
		for (int c = 0; c < 2; ++c)
			EXPECT_TRUE(bit_equal(back.values(i, c), s.values(i, c)));
	}
}

TEST(StencilJson, BitExactRoundTrip)
{
	const auto cloud = generate_interlaced_mesh(2, 5, 0.9);
	StencilOptions opt;
	opt.extra_neighbors = 2;
	const auto set = build_stencil_set(cloud, 3, opt);
	const auto j = io::to_json(set);
	const auto back = io::stencil_set_from_json(nlohmann::json::parse(j.dump()));
	EXPECT_EQ(back.size(), set.size());
	EXPECT_EQ(back.accuracy(), 3);
	for (VertexId v : set.bases())
		for (int mu = 0; mu < 2; ++mu)
		{
			const auto& a = set.at(v, mu);
			const auto& b = back.at(v, mu);
			EXPECT_EQ(a.neighborhood.members, b.neighborhood.members);
			ASSERT_EQ(a.weights.size(), b.weights.size());
			for (Eigen::Index i = 0; i < a.weights.size(); ++i)
			{
				EXPECT_TRUE(bit_equal(a.weights(i), b.weights(i)));
				for (int c = 0; c < 2; ++c)
					EXPECT_TRUE(bit_equal(a.neighborhood.offsets(i, c), b.neighborhood.offsets(i, c)));
			}
			EXPECT_TRUE(bit_equal(a.residual, b.residual));
		}
	EXPECT_EQ(io::to_json(back).dump(), j.dump());
	const auto& first = j.at("stencils").at(0);
	for (const char* key : {"base", "mu", "members", "offsets", "weights", "residual"})
		EXPECT_TRUE(first.contains(key)) << key;
}

TEST(StencilJson, MalformedInputIsSchemaError)
{
	EXPECT_THROW(io::stencil_set_from_json(nlohmann::json::parse(R"({"dimension": 1})")), SchemaError);
	auto j = io::to_json(build_stencil_set(generate_interlaced_mesh(1, 3, 1.0), 2));
	j["stencils"][0]["weights"].push_back(1.0);
	EXPECT_THROW(io::stencil_set_from_json(j), SchemaError);
}

TEST(StepwiseJson, PathLossCurveAndWeights)
{
	Rng rng(4);
	Eigen::MatrixXd X(30, 3);
	for (Eigen::Index i = 0; i < 30; ++i)
		for (Eigen::Index c = 0; c < 3; ++c)
			X(i, c) = rng.uniform(-1, 1);
	regress::Design d{X, X.col(1) * 2.0, {"a", "b", "c"}, std::vector<int>(30)};
	for (std::size_t i = 0; i < 30; ++i)
		d.groups[i] = static_cast<int>(i % 2);
	regress::StepwiseOptions opt;
	opt.cross_validate = true;
	const auto r = regress::stepwise_eliminate(d, regress::LossSpec{0.5, 1.0, 0.0, true}, regress::Solver::ridge(1e-6), opt);
	const auto j = io::to_json(r);
	ASSERT_EQ(j.at("path").size(), 3u);
	EXPECT_EQ(j["path"][2]["terms"], nlohmann::json::array({"b"}));
	EXPECT_DOUBLE_EQ(j["lambda"].get<double>(), 1e-6);
	EXPECT_DOUBLE_EQ(j["loss_weights"]["l1"].get<double>(), 0.5);
	EXPECT_TRUE(j["path"][0].contains("cv_loss"));

	std::ostringstream out;
	io::write_loss_curve(out, r);
	const auto t = parse(out.str());
	EXPECT_EQ(t.header, (std::vector<std::string>{"n_terms", "loss", "cv_loss"}));
	ASSERT_EQ(t.rows.size(), 3u);
	EXPECT_EQ(t.rows[0][0], "3");
}

TEST(ErrorStudyCsv, HeaderLayout)
{
	ErrorStudyConfig cfg;
	cfg.k = 2;
	cfg.r = 3;
	cfg.K = 4;
	cfg.meshes = {8, 16};
	const auto reports = error_study(study_polynomial(cfg), cfg);
	std::ostringstream out;
	io::write_error_study(out, reports, enumerate_multi_indices(1, 2));
	const auto t = parse(out.str());
	EXPECT_EQ(t.header, (std::vector<std::string>{"h", "m", "e_signed", "e_abs_mean", "e_max_abs", "eps_1_abs_mean",
							"eps_1_max_abs", "eps_2_abs_mean", "eps_2_max_abs", "gamma_dev_1_abs_mean",
							"gamma_dev_2_abs_mean"}));
	EXPECT_EQ(t.rows.size(), 2u);
}

TEST(JsonFiles, ReadWriteAndParseErrors)
{
	const auto dir = std::filesystem::temp_directory_path() / "nlgraph_io_test";
	std::filesystem::create_directories(dir);
	const auto good = (dir / "a.json").string();
	io::write_json(good, {{"x", 0.1}});
	EXPECT_DOUBLE_EQ(io::read_json(good)["x"].get<double>(), 0.1);
	const auto bad = (dir / "b.json").string();
	{
		std::ofstream f(bad);
		f << "{not json";
	}
	EXPECT_THROW(io::read_json(bad), ParseError);
	EXPECT_THROW(io::read_json((dir / "missing.json").string()), InputError);
	std::filesystem::remove_all(dir);
}
