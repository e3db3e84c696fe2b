#include "tsr/errors.hpp"
#include "tsr/synthetic.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <iostream>

// Generates the deterministic synthetic silhouette datasets used by the
// benchmarks and acceptance tests.
int main(int argc, char** argv) {
    CLI::App app{"synthetic silhouette dataset generator"};

    std::string layout = "kimia";
    std::string out;
    std::uint64_t seed = 0;
    app.add_option("--layout", layout, "kimia (9x11) | mpeg7 (10x20)");
    app.add_option("--out", out, "output directory")->required();
    app.add_option("--seed", seed, "dataset seed");

    try {
        app.parse(argc, argv);
        tsr::synth::DatasetSpec spec;
        if (layout == "kimia") spec = tsr::synth::kimia_like();
        else if (layout == "mpeg7") spec = tsr::synth::mpeg7_like();
        else throw tsr::UsageError("unknown layout '" + layout + "' (expected kimia or mpeg7)");
        tsr::synth::write_dataset(out, spec, seed);
        std::cerr << "wrote " << spec.classes.size() * spec.per_class << " shapes to " << out
                  << "\n";
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const tsr::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
