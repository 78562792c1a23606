#include "cli.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <ostream>
#include <utility>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "manifest.hpp"

namespace dta::cli {

namespace {

/// Options whose values override the config file when given on the command line.
class FlagSet {
 public:
  template <class T>
  void bind(CLI::App* sub, const std::string& flag, T RunConfig::*member, const std::string& help) {
    CLI::Option* o = sub->add_option(flag, parsed_.*member, help);
    overrides_.emplace_back(o, [member](RunConfig& dst, const RunConfig& src) { dst.*member = src.*member; });
  }

  void bind_path(CLI::App* sub, const std::string& flag, std::filesystem::path RunConfig::*member,
                 const std::string& help) {
    auto text = std::make_shared<std::string>();
    CLI::Option* o = sub->add_option(flag, *text, help);
    strings_.push_back(text);
    overrides_.emplace_back(o, [member, text](RunConfig& dst, const RunConfig&) { dst.*member = *text; });
  }

  void bind_seed(CLI::App* sub) {
    auto value = std::make_shared<std::uint64_t>(0);
    CLI::Option* o = sub->add_option("--seed", *value, "Master seed for every random stream (required)");
    seeds_.push_back(value);
    overrides_.emplace_back(o, [value](RunConfig& dst, const RunConfig&) { dst.seed = *value; });
  }

  void bind_beta_star(CLI::App* sub) {
    auto value = std::make_shared<double>(0.0);
    CLI::Option* o = sub->add_option("--beta-star", *value, "Baseline noise level (default beta-max / 2)");
    reals_.push_back(value);
    overrides_.emplace_back(o, [value](RunConfig& dst, const RunConfig&) { dst.beta_star = *value; });
  }

  void bind_precision(CLI::App* sub) {
    auto text = std::make_shared<std::string>();
    CLI::Option* o = sub->add_option("--precision", *text, "f64 or f32")->check(CLI::IsMember({"f64", "f32"}));
    strings_.push_back(text);
    overrides_.emplace_back(o, [text](RunConfig& dst, const RunConfig&) { dst.precision = parse_precision(*text); });
  }

  void apply(RunConfig& config) const {
    for (const auto& [option, set] : overrides_) {
      if (option->count() > 0) set(config, parsed_);
    }
  }

 private:
  RunConfig parsed_;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&, const RunConfig&)>>> overrides_;
  std::vector<std::shared_ptr<std::string>> strings_;
  std::vector<std::shared_ptr<std::uint64_t>> seeds_;
  std::vector<std::shared_ptr<double>> reals_;
};

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

}  // namespace

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config: return 3;
    case ErrorKind::numeric: return 4;
    case ErrorKind::layout: return 5;
    case ErrorKind::decode: return 6;
    case ErrorKind::format: return 7;
    case ErrorKind::io: return 8;
    case ErrorKind::metric: return 9;
  }
  return internal_exit_code;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Anomaly detection by trending denoiser outputs across noise levels", "dta"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());

  FlagSet flags;
  std::string config_path;
  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON file of parameters; flags take precedence");
    return sub;
  };

  CLI::App* synth = add("synth", "Generate the synthetic grating benchmark");
  flags.bind_path(synth, "--out", &RunConfig::out, "Output dataset root");
  flags.bind_seed(synth);
  flags.bind(synth, "--category", &RunConfig::category, "Category directory name");
  flags.bind(synth, "--size", &RunConfig::size, "Image side length");
  flags.bind(synth, "--train-count", &RunConfig::train_count, "Normal training images");
  flags.bind(synth, "--test-per-defect", &RunConfig::test_per_defect, "Test images per defect type");
  flags.bind(synth, "--test-good", &RunConfig::test_good, "Defect-free test images");

  CLI::App* train = add("train", "Train the denoiser on normal images");
  flags.bind_path(train, "--dataset", &RunConfig::dataset, "Dataset root");
  flags.bind_path(train, "--out", &RunConfig::out, "Output directory for model.ckpt and loss.csv");
  flags.bind_seed(train);
  flags.bind(train, "--category", &RunConfig::category, "Category to use when the root holds several");
  flags.bind(train, "--steps", &RunConfig::steps, "SGD steps");
  flags.bind(train, "--batch-size", &RunConfig::batch_size, "Images per step");
  flags.bind(train, "--learning-rate", &RunConfig::learning_rate, "SGD learning rate");
  flags.bind(train, "--train-beta-max", &RunConfig::train_beta_max, "Upper end of the training noise range");
  flags.bind_precision(train);

  CLI::App* detect = add("detect", "Write proposed, A, B and baseline score maps for every test image");
  flags.bind_path(detect, "--dataset", &RunConfig::dataset, "Dataset root");
  flags.bind_path(detect, "--model", &RunConfig::model, "Checkpoint file");
  flags.bind_path(detect, "--out", &RunConfig::out, "Output directory for score maps");
  flags.bind_seed(detect);
  flags.bind(detect, "--category", &RunConfig::category, "Category to use when the root holds several");
  flags.bind(detect, "--beta-max", &RunConfig::beta_max, "Largest noise level of the sweep");
  flags.bind(detect, "--levels", &RunConfig::levels, "Number of noise levels including zero");
  flags.bind(detect, "--weight", &RunConfig::weight, "Exponent on the uncertainty trend when fusing");
  flags.bind_beta_star(detect);
  flags.bind(detect, "--threads", &RunConfig::threads, "Worker threads (0 = all cores)");

  CLI::App* evaluate = add("evaluate", "Pixel AUROC and AP of every method per defect type");
  flags.bind_path(evaluate, "--dataset", &RunConfig::dataset, "Dataset root with ground-truth masks");
  flags.bind_path(evaluate, "--scores", &RunConfig::scores, "Output directory of detect");
  flags.bind_path(evaluate, "--out", &RunConfig::out, "Output directory for metrics.json and metrics.txt");
  flags.bind(evaluate, "--category", &RunConfig::category, "Category to use when the root holds several");

  CLI::App* report = add("report", "Render a metrics JSON file as a table");
  flags.bind_path(report, "--input", &RunConfig::input, "Metrics JSON");
  flags.bind_path(report, "--reference", &RunConfig::reference, "Metrics JSON to compute deltas against");
  flags.bind_path(report, "--out", &RunConfig::out, "Also write the table to this file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << tool_version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "dta: error[usage]: " << one_line(e.what()) << "\n";
    return usage_exit_code;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_config_file(config_path);
    flags.apply(config);
    config.command = chosen->get_name();
    if (config.command == "synth") {
      cmd_synth(config, err);
    } else if (config.command == "train") {
      cmd_train(config, err);
    } else if (config.command == "detect") {
      cmd_detect(config, err);
    } else if (config.command == "evaluate") {
      cmd_evaluate(config, err);
    } else {
      cmd_report(config, out);
    }
  } catch (const Error& e) {
    err << "dta: error[" << to_string(e.kind()) << "]: " << one_line(e.what()) << "\n";
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    err << "dta: error[format]: " << one_line(e.what()) << "\n";
    return exit_code(ErrorKind::format);
  } catch (const std::exception& e) {
    err << "dta: error[internal]: " << one_line(e.what()) << "\n";
    return internal_exit_code;
  }
  return 0;
}

}  // namespace dta::cli
