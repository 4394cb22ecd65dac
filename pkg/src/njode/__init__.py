"""Online forecasting of irregularly and partially observed stochastic processes.

A latent-ODE model integrates a drift network between observation events and
applies a jump (recurrent) network whenever new data arrives; a readout maps
the latent state to a prediction of the conditional expectation of the
underlying process.  The package ships the model, a from-scratch MLP/autodiff
substrate, truncated path signatures as model features, exact
conditional-expectation oracles for a suite of synthetic processes, dataset
generators, and a training harness with a CLI.
"""

__version__ = "0.1.0"
