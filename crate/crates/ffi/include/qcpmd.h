#ifndef QCPMD_H
#define QCPMD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum QcpmdStatus {
  QCPMD_STATUS_OK = 0,
  QCPMD_STATUS_NULL_POINTER = 1,
  QCPMD_STATUS_INVALID_ARGUMENT = 2,
  QCPMD_STATUS_CONFIG_ERROR = 3,
  QCPMD_STATUS_NUMERICAL_ERROR = 4,
  QCPMD_STATUS_IO_ERROR = 5,
  QCPMD_STATUS_PANIC = 6,
} QcpmdStatus;

/**
 * Qubit Hamiltonian of a molecule at a fixed geometry.
 */
typedef struct QcpmdHamiltonian QcpmdHamiltonian;

/**
 * A QCPMD or VQE-MD simulation advanced step by step.
 */
typedef struct QcpmdSimulation QcpmdSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy of the last error message on this thread, or null if the last call
 * succeeded. Release with `qcpmd_string_free`.
 */
char *qcpmd_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void qcpmd_string_free(char *s);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qcpmd_version(void);

/**
 * Hamiltonian of H2 along z with the given bond length in bohr.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QcpmdStatus qcpmd_hamiltonian_new_h2(double bond_bohr, struct QcpmdHamiltonian **out);

/**
 * Hamiltonian from a geometry JSON document
 * (`{"atoms": [{"element", "xyz_angstrom"}], "charge"}`).
 *
 * # Safety
 * `json` must be NUL-terminated; `out` must be a valid pointer.
 */
enum QcpmdStatus qcpmd_hamiltonian_from_geometry_json(const char *json,
                                                      struct QcpmdHamiltonian **out);

/**
 * # Safety
 * `h` must come from a `qcpmd_hamiltonian_*` constructor and not be used afterwards.
 */
void qcpmd_hamiltonian_free(struct QcpmdHamiltonian *h);

/**
 * Number of qubits and Pauli terms (identity included).
 *
 * # Safety
 * `h` must be a live handle; output pointers must be valid.
 */
enum QcpmdStatus qcpmd_hamiltonian_shape(const struct QcpmdHamiltonian *h,
                                         size_t *n_qubits,
                                         size_t *n_terms);

/**
 * Ground-state energy in the molecule's electron-number sector, hartree.
 *
 * # Safety
 * `h` must be a live handle; `out` must be valid.
 */
enum QcpmdStatus qcpmd_hamiltonian_fci_energy(const struct QcpmdHamiltonian *h, double *out);

/**
 * JSON `{n_qubits, terms: [[label, coefficient]]}`. Release with
 * `qcpmd_string_free`.
 *
 * # Safety
 * `h` must be a live handle; `out` must be valid.
 */
enum QcpmdStatus qcpmd_hamiltonian_to_json(const struct QcpmdHamiltonian *h, char **out);

/**
 * Simulation from a run-config JSON document. The geometry must be given
 * inline or through `bond_angstrom`; the angles are initialized by a
 * noiseless optimization and frame 0 is evaluated.
 *
 * # Safety
 * `config_json` must be NUL-terminated; `out` must be valid.
 */
enum QcpmdStatus qcpmd_simulation_new(const char *config_json, struct QcpmdSimulation **out);

/**
 * # Safety
 * `sim` must come from `qcpmd_simulation_new` and not be used afterwards.
 */
void qcpmd_simulation_free(struct QcpmdSimulation *sim);

/**
 * Advances by `n_steps` steps (not limited by the config's `n_steps`).
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum QcpmdStatus qcpmd_simulation_step(struct QcpmdSimulation *sim, uint64_t n_steps);

/**
 * Number of nuclear coordinates (3N) and ansatz parameters.
 *
 * # Safety
 * `sim` must be a live handle; output pointers must be valid.
 */
enum QcpmdStatus qcpmd_simulation_shape(const struct QcpmdSimulation *sim,
                                        size_t *n_coordinates,
                                        size_t *n_params);

/**
 * Copies the current state. `r` and `v` hold `n_coordinates` values,
 * `theta` and `xi` hold `n_params`; any of them may be null to skip it.
 * Atomic units throughout.
 *
 * # Safety
 * Non-null buffers must have the stated lengths.
 */
enum QcpmdStatus qcpmd_simulation_state(const struct QcpmdSimulation *sim,
                                        double *r,
                                        double *v,
                                        size_t n_coordinates,
                                        double *theta,
                                        double *xi,
                                        size_t n_params,
                                        uint64_t *step,
                                        double *time);

/**
 * Energy estimate of the current frame and its variance.
 *
 * # Safety
 * `sim` must be a live handle; output pointers must be valid.
 */
enum QcpmdStatus qcpmd_simulation_energy(const struct QcpmdSimulation *sim,
                                         double *energy,
                                         double *variance);

/**
 * Cumulative shots and circuit executions.
 *
 * # Safety
 * `sim` must be a live handle; output pointers must be valid.
 */
enum QcpmdStatus qcpmd_simulation_resources(const struct QcpmdSimulation *sim,
                                            uint64_t *shots,
                                            uint64_t *circuits);

/**
 * Harmonic wavenumber (cm^-1) implied by the thermal variance of a bond
 * length: `omega = sqrt(1 / (beta mu_red var))`.
 *
 * # Safety
 * `out` must be valid.
 */
enum QcpmdStatus qcpmd_wavenumber_from_bond_variance(double variance_bohr2,
                                                     double reduced_mass_amu,
                                                     double temperature_k,
                                                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCPMD_H */
