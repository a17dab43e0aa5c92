#!/usr/bin/env python3
"""
Lagrange-Ops Setup Script
Prepares the environment and runs a smoke check on the shipped fixtures
"""

import shutil
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent


def install_requirements():
    """Install required packages"""
    print("📦 Installing required packages...")
    try:
        subprocess.check_call([sys.executable, "-m", "pip", "install", "-r", str(ROOT / "requirements.txt")])
        print("✅ All packages installed successfully!")
    except subprocess.CalledProcessError:
        print("❌ Failed to install packages. Please check your Python environment.")
        return False
    return True


def check_python_version():
    """Check if Python version is compatible"""
    version = sys.version_info
    if version.major < 3 or (version.major == 3 and version.minor < 8):
        print(f"❌ Python 3.8+ required. Current version: {version.major}.{version.minor}")
        return False
    print(f"✅ Python version {version.major}.{version.minor}.{version.micro} is compatible")
    return True


def create_env_file():
    """Copy .env.example to .env unless one exists"""
    env_file = ROOT / ".env"
    if env_file.exists():
        print("📁 .env found, keeping it")
        return
    shutil.copy(ROOT / ".env.example", env_file)
    print("✅ .env created from .env.example")


def smoke_run():
    """Run the batch runner over the fixtures"""
    print("\n🧪 Running fixture smoke check...")
    return subprocess.call([sys.executable, str(ROOT / "run.py")]) == 0


def main():
    print("🚀 Lagrange-Ops Setup")
    print("=" * 50)

    if not check_python_version():
        sys.exit(1)

    create_env_file()

    if not install_requirements():
        sys.exit(1)

    if not smoke_run():
        print("❌ Fixture smoke check failed")
        sys.exit(1)

    print("\n🎉 Setup completed successfully!")
    print("\n📋 Next steps:")
    print("1. Run: python lagrange_ops.py all --problem fixtures/radial_total.txt")
    print("2. Machine records: add --json")
    print("3. HTML report: add --html report.html")
    print("\n💡 Tips:")
    print("- Defaults live in .env (see .env.example)")
    print("- Problem files override .env with 'set' lines, CLI flags override both")


if __name__ == "__main__":
    if len(sys.argv) > 1:
        # Invoked by a build frontend (pip / setuptools): packaging metadata lives in pyproject.toml
        from setuptools import setup

        setup()
    else:
        main()
