// helvort command-line driver.
//
//   helvort solve <config.json>        run a configuration end to end
//   helvort report <run_dir>           re-emit verdicts from run artifacts
//   helvort export <run_dir> --vtk     write 3D lift files for a finished run
//
// Exit codes: 0 ok, 2 config error, 3 solver failure, 4 verdict failure.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "helvort/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"ground states of the helical vortex desingularization problem"};
    app.require_subcommand(1);

    std::string config_path, run_dir, export_dir;
    bool want_vtk = false;

    CLI::App* solve = app.add_subcommand("solve", "run a configuration");
    solve->add_option("config", config_path, "JSON run configuration")->required();

    CLI::App* report = app.add_subcommand("report", "re-emit verdicts from a run directory");
    report->add_option("run_dir", run_dir, "directory produced by solve")->required();

    CLI::App* exp = app.add_subcommand("export", "export 3D lifts from a run directory");
    exp->add_option("run_dir", export_dir, "directory produced by solve")->required();
    exp->add_flag("--vtk", want_vtk, "write legacy VTK lift files");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            const helvort::RunResult r = helvort::run(config_path, std::cout);
            std::cout << "artifacts: " << r.run_dir.string() << "\n";
            return r.exit_code;
        }
        if (report->parsed()) {
            return helvort::report(run_dir, std::cout).exit_code;
        }
        if (exp->parsed()) {
            if (!want_vtk) {
                std::cerr << "nothing to export (pass --vtk)\n";
                return 2;
            }
            return helvort::export_vtk(export_dir, std::cout);
        }
    } catch (const helvort::ConfigParse& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const helvort::IoError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const helvort::Error& e) {
        std::cerr << e.what() << "\n";
        return 3;
    }
    return 0;
}
