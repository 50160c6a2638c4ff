//! A matplotlib script dropped next to the CSVs. It plots whichever known
//! files it finds; butterflies use a logarithmic energy axis.

use std::path::Path;

use crate::error::Result;
use crate::output::{sha256_hex, write_bytes, FileRecord};

pub const PLOT_FILE: &str = "plot.py";

const SCRIPT: &str = r#"#!/usr/bin/env python3
"""Plots the CSV files in this directory. Usage: python3 plot.py [dir]"""
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

here = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))


def load(name):
    path = os.path.join(here, name)
    return pd.read_csv(path) if os.path.exists(path) else None


def save(fig, name):
    fig.tight_layout()
    fig.savefig(os.path.join(here, name), dpi=200)
    plt.close(fig)


df = load("energies.csv")
if df is not None:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.scatter(df.re_energy, -df.im_energy, s=2)
    ax.set_yscale("log")
    ax.set_xlabel("Re energy / Gamma0")
    ax.set_ylabel("-Im energy / Gamma0")
    save(fig, "energies.png")

df = load("butterfly.csv")
if df is not None:
    fig, ax = plt.subplots(figsize=(6, 4))
    edge = df.is_edge.astype(bool)
    sc = ax.scatter(df.flux[~edge], df.energy_aligned[~edge], c=df.localization[~edge], s=1, cmap="viridis")
    ax.scatter(df.flux[edge], df.energy_aligned[edge], s=4, c="red", label="edge")
    ax.set_yscale("log")
    ax.set_xlabel("flux j/N")
    ax.set_ylabel("aligned energy")
    fig.colorbar(sc, label="IPR")
    ax.legend()
    save(fig, "butterfly.png")

df = load("butterfly_aah.csv")
if df is not None:
    fig, ax = plt.subplots(figsize=(6, 4))
    finite = df.dos_log10.replace([float("inf"), float("-inf")], float("nan"))
    sc = ax.scatter(df.flux, df.energy_aligned, c=finite, s=1, cmap="magma")
    ax.set_yscale("log")
    ax.set_xlabel("flux j/N")
    ax.set_ylabel("aligned energy")
    fig.colorbar(sc, label="log10 |fourth difference|")
    save(fig, "butterfly_aah.png")

df = load("hofstadter.csv")
if df is not None:
    fig, ax = plt.subplots(figsize=(6, 4))
    sc = ax.scatter(df.alpha, df.energy, c=df.ipr, s=0.2, cmap="viridis")
    ax.set_xlabel("alpha")
    ax.set_ylabel("energy")
    fig.colorbar(sc, label="IPR")
    save(fig, "hofstadter.png")

df = load("compare.csv")
if df is not None:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(df["rank"], df.energy_exact, "o", label="exact")
    ax.plot(df["rank"], df.energy_aah, "x", label="self-AAH")
    ax.set_xlabel("rank from cluster top")
    ax.set_ylabel("Re energy / Gamma0")
    ax.legend()
    save(fig, "compare.png")

df = load("entanglement.csv")
if df is not None:
    fig, ax = plt.subplots(figsize=(5, 4))
    sc = ax.scatter(df.re_energy, -df.im_energy, c=df.entropy, s=2, cmap="plasma")
    ax.set_yscale("log")
    ax.set_xlabel("Re energy / Gamma0")
    ax.set_ylabel("-Im energy / Gamma0")
    fig.colorbar(sc, label="entanglement entropy")
    save(fig, "entanglement.png")
"#;

pub fn write_plot_script(dir: &Path) -> Result<FileRecord> {
    write_bytes(&dir.join(PLOT_FILE), SCRIPT.as_bytes())?;
    Ok(FileRecord {
        path: PLOT_FILE.to_string(),
        sha256: sha256_hex(SCRIPT.as_bytes()),
        rows: None,
    })
}
