#include "artifact.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <spdlog/fmt/fmt.h>

namespace l0path::cli {

using nlohmann::json;

namespace {

json options_json(const PathArtifact& a) {
  const PathOptions& o = a.path.options;
  json j{{"n_lambda", o.n_lambda},
         {"scale_down", o.scale_down},
         {"local_search", a.local_search},
         {"max_swaps", o.max_swaps},
         {"cross_gamma_warm_start", o.cross_gamma_warm_start},
         {"tol", o.fit.tol},
         {"coef_tol", o.fit.coef_tol},
         {"max_sweeps", o.fit.max_sweeps},
         {"screening_size", o.fit.screening_size},
         {"intercept", o.fit.intercept},
         {"threads", o.threads}};
  j["max_support"] = o.fit.max_support ? json(*o.fit.max_support) : json(nullptr);
  j["box"] = o.box ? json{{"lo", o.box->lo}, {"hi", o.box->hi}} : json(nullptr);
  return j;
}

PathOptions options_from_json(const json& j, bool& local_search) {
  PathOptions o;
  o.n_lambda = j.at("n_lambda").get<std::size_t>();
  o.scale_down = j.at("scale_down").get<double>();
  local_search = j.at("local_search").get<bool>();
  o.local_search = local_search;
  o.max_swaps = j.at("max_swaps").get<std::size_t>();
  o.cross_gamma_warm_start = j.at("cross_gamma_warm_start").get<bool>();
  o.fit.tol = j.at("tol").get<double>();
  o.fit.coef_tol = j.at("coef_tol").get<double>();
  o.fit.max_sweeps = j.at("max_sweeps").get<std::size_t>();
  o.fit.screening_size = j.at("screening_size").get<std::size_t>();
  o.fit.intercept = j.at("intercept").get<bool>();
  o.threads = j.at("threads").get<int>();
  if (!j.at("max_support").is_null()) {
    o.fit.max_support = j.at("max_support").get<std::size_t>();
  }
  if (!j.at("box").is_null()) {
    o.box = Box{j.at("box").at("lo").get<double>(),
                j.at("box").at("hi").get<double>()};
  }
  return o;
}

}  // namespace

json to_json(const PathArtifact& a) {
  const FitPath& fp = a.path;
  json paths = json::array();
  for (const GammaPath& g : fp.paths) {
    json models = json::array();
    for (const Model& m : g.models) {
      models.push_back({{"lambda", m.lambda},
                        {"intercept", m.intercept},
                        {"indices", m.beta.indices},
                        {"values", m.beta.values},
                        {"objective", m.objective},
                        {"support_size", m.support_size()},
                        {"sweeps", m.sweeps},
                        {"converged", m.termination == Termination::Converged}});
    }
    json entry{{"gamma", g.gamma}, {"models", std::move(models)}};
    if (a.record_timing) entry["seconds"] = g.seconds;
    paths.push_back(std::move(entry));
  }
  json j{{"schema_version", kSchemaVersion},
         {"loss", std::string(to_string(fp.loss))},
         {"penalty", std::string(to_string(fp.kind))},
         {"n", fp.n},
         {"p", fp.p},
         {"gammas", fp.gammas()},
         {"options", options_json(a)},
         {"paths", std::move(paths)}};
  if (a.cv) {
    j["cv"] = {{"folds", a.cv->folds},
               {"seed", a.cv->seed},
               {"best_gamma_index", a.cv->best_gamma_index},
               {"best_lambda_index", a.cv->best_lambda_index}};
  }
  return j;
}

PathArtifact from_json(const json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion) {
      throw std::invalid_argument("unsupported schema_version " +
                                  std::to_string(version));
    }
    PathArtifact a;
    FitPath& fp = a.path;
    fp.loss = parse_loss(j.at("loss").get<std::string>());
    fp.kind = parse_penalty(j.at("penalty").get<std::string>());
    fp.n = j.at("n").get<std::size_t>();
    fp.p = j.at("p").get<std::size_t>();
    fp.options = options_from_json(j.at("options"), a.local_search);
    for (const json& g : j.at("paths")) {
      GammaPath gp;
      gp.gamma = g.at("gamma").get<double>();
      if (g.contains("seconds")) {
        gp.seconds = g.at("seconds").get<double>();
        a.record_timing = true;
      }
      for (const json& m : g.at("models")) {
        Model model;
        model.gamma = gp.gamma;
        model.lambda = m.at("lambda").get<double>();
        model.intercept = m.at("intercept").get<double>();
        model.beta.indices = m.at("indices").get<std::vector<std::size_t>>();
        model.beta.values = m.at("values").get<std::vector<double>>();
        model.objective = m.at("objective").get<double>();
        model.sweeps = m.at("sweeps").get<std::size_t>();
        model.termination = m.at("converged").get<bool>()
                                ? Termination::Converged
                                : Termination::MaxSweeps;
        if (model.beta.indices.size() != model.beta.values.size()) {
          throw std::invalid_argument("indices and values differ in length");
        }
        for (std::size_t i : model.beta.indices) {
          if (i >= fp.p) throw std::invalid_argument("coefficient index out of range");
        }
        gp.models.push_back(std::move(model));
      }
      fp.paths.push_back(std::move(gp));
    }
    if (j.contains("cv")) {
      const json& c = j.at("cv");
      a.cv = CVSummary{c.at("folds").get<std::size_t>(),
                       c.at("seed").get<std::uint64_t>(),
                       c.at("best_gamma_index").get<std::size_t>(),
                       c.at("best_lambda_index").get<std::size_t>()};
      if (a.cv->best_gamma_index >= fp.paths.size() ||
          a.cv->best_lambda_index >=
              fp.paths[a.cv->best_gamma_index].models.size()) {
        throw std::invalid_argument("cv selection out of range");
      }
    }
    return a;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed model artifact: ") +
                                e.what());
  }
}

void write_artifact(const std::filesystem::path& file,
                    const PathArtifact& artifact) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file.string());
  out << to_json(artifact).dump(1) << '\n';
  if (!out) throw DataError("failed writing " + file.string());
}

PathArtifact read_artifact(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot read model file " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("model file " + file.string() + " is not valid JSON");
  }
  return from_json(j);
}

std::string cv_table_csv(const CVResult& cv) {
  std::string out = "gamma,lambda,support_size,mean_loss,se\n";
  for (std::size_t g = 0; g < cv.path.paths.size(); ++g) {
    const GammaPath& gp = cv.path.paths[g];
    for (std::size_t l = 0; l < gp.models.size(); ++l) {
      out += fmt::format("{},{},{},{},{}\n", gp.gamma, gp.models[l].lambda,
                         gp.models[l].support_size(), cv.mean[g][l],
                         cv.se[g][l]);
    }
  }
  return out;
}

}  // namespace l0path::cli
