"""3D Pendulum Optimal Control"""
